#include <catch2/catch_amalgamated.hpp>

#include <memory>
#include <sstream>
#include <vector>

#include "gwig/ensemble.hpp"
#include "oracle_helpers.hpp"

using namespace gwig;
using Catch::Approx;

namespace {

std::shared_ptr<const VarianceProfile> shared_flat(Index n) {
    return std::make_shared<VarianceProfile>(build_flat(n));
}

} // namespace

TEST_CASE("sampling determinism and hermiticity") {
    const auto profile = shared_flat(16);
    const SampleSpec spec{profile, EntryLaw::complex_gaussian, 42, 7};
    const WignerSample a = sample(spec);
    const WignerSample b = sample(spec);
    REQUIRE(a.w == b.w);

    SampleSpec other = spec;
    other.sample_index = 8;
    REQUIRE(sample(other).w != a.w);

    REQUIRE((a.w - a.w.adjoint()).cwiseAbs().maxCoeff() == 0.0);
    REQUIRE(a.w.diagonal().imag().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("scalar flat sample is a standard normal") {
    const auto profile = shared_flat(1);
    std::vector<double> values;
    for (std::uint64_t k = 0; k < 2000; ++k) {
        const WignerSample s =
            sample({profile, EntryLaw::real_gaussian, 11, k});
        REQUIRE(s.w.rows() == 1);
        REQUIRE(s.w(0, 0).imag() == 0.0);
        values.push_back(std::norm(s.w(0, 0)));
    }
    const auto stat = oracle::mean_stderr(values);
    REQUIRE(std::abs(stat.mean - 1.0) <= 4.0 * stat.stderr_);
}

TEST_CASE("phase law has exact modulus") {
    const auto profile =
        std::make_shared<VarianceProfile>(build_cosine_circulant(12, 0.4));
    const WignerSample s =
        sample({profile, EntryLaw::complex_rademacher_phase, 3, 0});
    for (Index i = 0; i < 12; ++i)
        for (Index j = 0; j < 12; ++j)
            REQUIRE(std::norm(s.w(i, j)) ==
                    Approx(profile->s()(i, j)).epsilon(1e-12));
}

TEST_CASE("entry second moments match the profile", "[mc]") {
    const auto profile = shared_flat(256);
    std::vector<double> values;
    for (std::uint64_t k = 0; k < 500; ++k) {
        const WignerSample s =
            sample({profile, EntryLaw::complex_gaussian, 2024, k});
        values.push_back(std::norm(s.w(0, 1)));
    }
    const auto stat = oracle::mean_stderr(values);
    REQUIRE(std::abs(stat.mean - 1.0 / 256.0) <= 4.0 * stat.stderr_);
}

TEST_CASE("empirical variance profile", "[mc]") {
    SECTION("flat CLT band") {
        const auto profile = shared_flat(32);
        std::vector<SampleSpec> specs;
        for (std::uint64_t k = 0; k < 1000; ++k)
            specs.push_back({profile, EntryLaw::complex_gaussian, 5, k});
        const RealMatrix mean = empirical_variance_profile(specs);
        const double band = 3.0 * 5.0 / (std::sqrt(1000.0) * 32.0);
        REQUIRE((mean.array() - 1.0 / 32.0).abs().maxCoeff() <= band);
    }

    SECTION("cosine CLT band") {
        const auto profile =
            std::make_shared<VarianceProfile>(build_cosine_circulant(32, 0.5));
        std::vector<SampleSpec> specs;
        for (std::uint64_t k = 0; k < 1000; ++k)
            specs.push_back({profile, EntryLaw::complex_gaussian, 6, k});
        const RealMatrix mean = empirical_variance_profile(specs);
        const double band = 3.0 * 5.0 / (std::sqrt(1000.0) * 32.0);
        REQUIRE((mean - profile->s()).cwiseAbs().maxCoeff() <= band);
    }
}

TEST_CASE("empirical variance profile edge cases") {
    const auto profile = shared_flat(8);
    const SampleSpec spec{profile, EntryLaw::complex_gaussian, 9, 4};
    const RealMatrix mean = empirical_variance_profile({spec, spec});
    REQUIRE((mean - RealMatrix(sample(spec).w.cwiseAbs2())).cwiseAbs().maxCoeff() <=
            1e-15);

    const auto other = shared_flat(9);
    REQUIRE_THROWS_AS(
        empirical_variance_profile(
            {spec, {other, EntryLaw::complex_gaussian, 9, 4}}),
        MixedProfilesError);
    REQUIRE_THROWS_AS(
        empirical_variance_profile({spec, {profile, EntryLaw::real_gaussian, 9, 4}}),
        MixedProfilesError);
    REQUIRE_THROWS_AS(empirical_variance_profile({spec}), ConfigError);
}

TEST_CASE("binary dump round trip") {
    const auto profile = shared_flat(10);
    const WignerSample s =
        sample({profile, EntryLaw::complex_rademacher_phase, 77, 1});
    std::stringstream stream;
    write_sample_binary(stream, s);

    const std::string bytes = stream.str();
    REQUIRE(bytes.size() == 16 + 10 * 10 * 16);
    REQUIRE(bytes.substr(0, 4) == "GWIG");

    const WignerSample back = read_sample_binary(stream);
    REQUIRE(back.law == EntryLaw::complex_rademacher_phase);
    REQUIRE(back.w == s.w);

    std::stringstream bad("not a dump");
    REQUIRE_THROWS_AS(read_sample_binary(bad), IoError);
}
