#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <memory>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "gwig/errors.hpp"
#include "gwig/linalg.hpp"
#include "gwig/variance_profile.hpp"

namespace gwig {

/// Entry laws all satisfy E w_ij = 0 and E|w_ij|^2 = S_ij; the complex laws
/// additionally have E w_ij^2 = 0 off the diagonal.
enum class EntryLaw : std::uint32_t {
    complex_gaussian = 0,
    real_gaussian = 1,
    complex_rademacher_phase = 2,
};

inline bool is_complex_law(EntryLaw law) { return law != EntryLaw::real_gaussian; }

inline std::string law_name(EntryLaw law) {
    switch (law) {
        case EntryLaw::complex_gaussian: return "complex_gaussian";
        case EntryLaw::real_gaussian: return "real_gaussian";
        case EntryLaw::complex_rademacher_phase: return "complex_rademacher_phase";
    }
    throw ConfigError("unknown entry law");
}

inline EntryLaw law_from_name(const std::string& name) {
    if (name == "complex_gaussian") return EntryLaw::complex_gaussian;
    if (name == "real_gaussian") return EntryLaw::real_gaussian;
    if (name == "complex_rademacher_phase") return EntryLaw::complex_rademacher_phase;
    throw ConfigError("unknown entry law: " + name);
}

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Sub-stream split: sample k draws from an engine seeded with
/// splitmix64(splitmix64(seed) ^ splitmix64(k+1)), so parallel sampling is
/// order-independent and bit-reproducible.
inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t sample_index) {
    return splitmix64(splitmix64(seed) ^ splitmix64(sample_index + 1));
}

struct SampleSpec {
    std::shared_ptr<const VarianceProfile> profile;
    EntryLaw law = EntryLaw::complex_gaussian;
    std::uint64_t seed = 0;
    std::uint64_t sample_index = 0;
};

struct WignerSample {
    ComplexMatrix w;
    EntryLaw law = EntryLaw::complex_gaussian;
    std::shared_ptr<const VarianceProfile> profile;

    const VarianceProfile& variance_profile() const {
        if (!profile) throw ConfigError("sample carries no variance profile");
        return *profile;
    }
};

/// Draws one Hermitian sample. Entries are generated on the upper triangle in
/// row-major order and mirrored, so Hermiticity is exact by construction.
inline WignerSample sample(const SampleSpec& spec) {
    if (!spec.profile) throw ConfigError("sample spec has no profile");
    const VarianceProfile& profile = *spec.profile;
    const Index n = profile.n();

    std::mt19937_64 rng(stream_seed(spec.seed, spec.sample_index));
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    WignerSample out;
    out.law = spec.law;
    out.profile = spec.profile;
    out.w = ComplexMatrix::Zero(n, n);
    for (Index i = 0; i < n; ++i) {
        for (Index j = i; j < n; ++j) {
            const double s_ij = profile.s()(i, j);
            if (i == j) {
                double value = 0.0;
                switch (spec.law) {
                    case EntryLaw::complex_gaussian:
                    case EntryLaw::real_gaussian:
                        value = std::sqrt(s_ij) * normal(rng);
                        break;
                    case EntryLaw::complex_rademacher_phase:
                        value = std::sqrt(s_ij) * (unit(rng) < 0.5 ? -1.0 : 1.0);
                        break;
                }
                out.w(i, i) = value;
            } else {
                Complex value;
                switch (spec.law) {
                    case EntryLaw::complex_gaussian:
                        value = std::sqrt(s_ij / 2.0) *
                                Complex(normal(rng), normal(rng));
                        break;
                    case EntryLaw::real_gaussian:
                        value = std::sqrt(s_ij) * normal(rng);
                        break;
                    case EntryLaw::complex_rademacher_phase: {
                        const double theta = 2.0 * std::numbers::pi * unit(rng);
                        value = std::sqrt(s_ij) *
                                Complex(std::cos(theta), std::sin(theta));
                        break;
                    }
                }
                out.w(i, j) = value;
                out.w(j, i) = std::conj(value);
            }
        }
    }
    return out;
}

/// Entrywise mean of |w_ij|^2 across the given specs (calibration diagnostic).
inline RealMatrix empirical_variance_profile(const std::vector<SampleSpec>& specs) {
    if (specs.size() < 2)
        throw ConfigError("empirical variance profile needs >= 2 samples");
    const VarianceProfile& first = *specs.front().profile;
    for (const SampleSpec& spec : specs) {
        if (!spec.profile) throw MixedProfilesError("spec without profile");
        if (spec.law != specs.front().law)
            throw MixedProfilesError("specs disagree on entry law");
        if (spec.profile.get() != specs.front().profile.get() &&
            (spec.profile->n() != first.n() || spec.profile->s() != first.s()))
            throw MixedProfilesError("specs disagree on variance profile");
    }

    RealMatrix acc = RealMatrix::Zero(first.n(), first.n());
    for (const SampleSpec& spec : specs) acc += sample(spec).w.cwiseAbs2();
    return acc / static_cast<double>(specs.size());
}

namespace detail {

inline void put_u32(std::ostream& os, std::uint32_t v) {
    char bytes[4];
    for (int k = 0; k < 4; ++k) bytes[k] = static_cast<char>((v >> (8 * k)) & 0xFF);
    os.write(bytes, 4);
}

inline std::uint32_t get_u32(std::istream& is) {
    unsigned char bytes[4];
    is.read(reinterpret_cast<char*>(bytes), 4);
    std::uint32_t v = 0;
    for (int k = 0; k < 4; ++k) v |= static_cast<std::uint32_t>(bytes[k]) << (8 * k);
    return v;
}

inline void put_f64(std::ostream& os, double v) {
    std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
    char bytes[8];
    for (int k = 0; k < 8; ++k) bytes[k] = static_cast<char>((bits >> (8 * k)) & 0xFF);
    os.write(bytes, 8);
}

inline double get_f64(std::istream& is) {
    unsigned char bytes[8];
    is.read(reinterpret_cast<char*>(bytes), 8);
    std::uint64_t bits = 0;
    for (int k = 0; k < 8; ++k) bits |= static_cast<std::uint64_t>(bytes[k]) << (8 * k);
    return std::bit_cast<double>(bits);
}

} // namespace detail

/// Debug dump: 16-byte header ("GWIG", n as u32, law tag as u32, 4 reserved
/// zero bytes) followed by row-major little-endian (re, im) f64 pairs.
inline void write_sample_binary(std::ostream& os, const WignerSample& sample) {
    os.write("GWIG", 4);
    detail::put_u32(os, static_cast<std::uint32_t>(sample.w.rows()));
    detail::put_u32(os, static_cast<std::uint32_t>(sample.law));
    detail::put_u32(os, 0);
    for (Index i = 0; i < sample.w.rows(); ++i)
        for (Index j = 0; j < sample.w.cols(); ++j) {
            detail::put_f64(os, sample.w(i, j).real());
            detail::put_f64(os, sample.w(i, j).imag());
        }
    if (!os) throw IoError("failed writing sample dump");
}

inline WignerSample read_sample_binary(std::istream& is) {
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "GWIG", 4) != 0)
        throw IoError("bad magic in sample dump");
    const auto n = static_cast<Index>(detail::get_u32(is));
    const auto law = static_cast<EntryLaw>(detail::get_u32(is));
    detail::get_u32(is);
    WignerSample out;
    out.law = law;
    out.w.resize(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) {
            const double re = detail::get_f64(is);
            const double im = detail::get_f64(is);
            out.w(i, j) = Complex(re, im);
        }
    if (!is) throw IoError("truncated sample dump");
    return out;
}

} // namespace gwig
