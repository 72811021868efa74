#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "gwig/eigensolver.hpp"
#include "gwig/errors.hpp"
#include "gwig/linalg.hpp"
#include "gwig/variance_profile.hpp"

namespace gwig {

/// Deterministic test matrix with a certified spectral-norm upper bound.
/// Diagonal observables keep compressed storage; products of two diagonals
/// stay diagonal, everything else is stored densely.
class Observable {
  public:
    static Observable diagonal(ComplexVector d, bool traceless = false) {
        Observable b;
        b.diag_ = std::move(d);
        b.is_diagonal_ = true;
        b.traceless_ = traceless;
        b.op_norm_bound_ = b.diag_.size() == 0 ? 0.0 : b.diag_.cwiseAbs().maxCoeff();
        return b;
    }

    static Observable dense(ComplexMatrix m, double norm_bound,
                            bool traceless = false) {
        Observable b;
        b.dense_ = std::move(m);
        b.is_diagonal_ = false;
        b.traceless_ = traceless;
        b.op_norm_bound_ = norm_bound;
        return b;
    }

    /// Dense observable with the exact spectral norm (largest singular value).
    static Observable dense_exact(ComplexMatrix m, bool traceless = false) {
        const double norm = m.jacobiSvd().singularValues()(0);
        return dense(std::move(m), norm, traceless);
    }

    Index n() const {
        return is_diagonal_ ? diag_.size() : dense_.rows();
    }
    bool is_diagonal() const { return is_diagonal_; }
    bool traceless() const { return traceless_; }
    double op_norm_bound() const { return op_norm_bound_; }

    const ComplexVector& diagonal_entries() const { return diag_; }
    const ComplexMatrix& dense_entries() const { return dense_; }

    ComplexMatrix to_dense() const {
        if (!is_diagonal_) return dense_;
        return ComplexMatrix(diag_.asDiagonal());
    }

    ComplexVector diagonal_part() const {
        return is_diagonal_ ? diag_ : ComplexVector(dense_.diagonal());
    }

    Complex mean() const {
        if (is_diagonal_)
            return diag_.sum() / static_cast<double>(diag_.size());
        return normalized_trace(dense_);
    }

  private:
    ComplexMatrix dense_;
    ComplexVector diag_;
    bool is_diagonal_ = false;
    bool traceless_ = false;
    double op_norm_bound_ = 0.0;
};

inline Observable identity_observable(Index n) {
    return Observable::diagonal(ComplexVector::Ones(n));
}

/// B - <B> I. Inputs already flagged traceless pass through unchanged, which
/// makes the projection exactly idempotent.
inline Observable traceless(const Observable& b) {
    if (b.traceless()) return b;
    const Complex mean = b.mean();
    if (b.is_diagonal()) {
        ComplexVector d = b.diagonal_entries().array() - mean;
        return Observable::diagonal(std::move(d), true);
    }
    ComplexMatrix m = b.dense_entries();
    m.diagonal().array() -= mean;
    return Observable::dense(std::move(m), b.op_norm_bound() + std::abs(mean),
                             true);
}

inline Observable adjoint(const Observable& b) {
    if (b.is_diagonal())
        return Observable::diagonal(b.diagonal_entries().conjugate(),
                                    b.traceless());
    return Observable::dense(b.dense_entries().adjoint(), b.op_norm_bound(),
                             b.traceless());
}

inline Observable scale(const Observable& b, Complex c) {
    if (b.is_diagonal())
        return Observable::diagonal(c * b.diagonal_entries(),
                                    b.traceless());
    return Observable::dense(c * b.dense_entries(),
                             std::abs(c) * b.op_norm_bound(), b.traceless());
}

inline Observable multiply(const Observable& a, const Observable& b) {
    if (a.n() != b.n()) throw ConfigError("observable dimension mismatch");
    if (a.is_diagonal() && b.is_diagonal()) {
        ComplexVector d =
            a.diagonal_entries().cwiseProduct(b.diagonal_entries());
        return Observable::diagonal(std::move(d));
    }
    ComplexMatrix m = a.to_dense() * b.to_dense();
    return Observable::dense(std::move(m),
                             a.op_norm_bound() * b.op_norm_bound());
}

struct ObservableFamily {
    int level = 0;
    std::vector<Observable> members;
    bool sampled = false;
};

/// M_0 = { N diag S_tilde_mu } from the columns of the square-root profile.
inline ObservableFamily build_m0(const SqrtProfile& sq) {
    if (!sq.assumption_ok)
        throw AssumptionViolatedError(
            "M0 requires strictly positive sqrt-profile entries");
    const Index n = sq.s_tilde.rows();
    ObservableFamily fam;
    fam.level = 0;
    fam.members.reserve(static_cast<std::size_t>(n));
    for (Index mu = 0; mu < n; ++mu) {
        ComplexVector d =
            (static_cast<double>(n) * sq.s_tilde.col(mu)).cast<Complex>();
        fam.members.push_back(Observable::diagonal(std::move(d)));
    }
    return fam;
}

/// M_1 = {I, M} united with M_0; M must be traceless with norm bound <= 1.
inline ObservableFamily build_m1(const ObservableFamily& m0,
                                 const Observable& m) {
    if (m0.level != 0) throw ConfigError("build_m1 expects a level-0 family");
    if (!m.traceless() && std::abs(m.mean()) > 1e-12)
        throw ConfigError("build_m1 observable must be traceless");
    if (m.op_norm_bound() > 1.0 + 1e-12)
        throw ConfigError("build_m1 observable must have norm bound <= 1");
    ObservableFamily fam;
    fam.level = 1;
    fam.sampled = m0.sampled;
    fam.members.reserve(m0.members.size() + 2);
    fam.members.push_back(identity_observable(m.n()));
    fam.members.push_back(m);
    fam.members.insert(fam.members.end(), m0.members.begin(), m0.members.end());
    return fam;
}

/// Level k+1 products B1 B2 over the pool M_k united with its traceless parts.
/// When the full cross product exceeds max_members, a seeded uniform subsample
/// of ordered pairs is taken and the family is flagged.
inline ObservableFamily extend(const ObservableFamily& fam,
                               std::size_t max_members, std::uint64_t seed) {
    if (fam.level < 1) throw ConfigError("extend expects level >= 1");
    std::vector<const Observable*> pool;
    std::vector<Observable> traceless_members;
    traceless_members.reserve(fam.members.size());
    for (const Observable& b : fam.members) {
        pool.push_back(&b);
        traceless_members.push_back(traceless(b));
    }
    for (const Observable& b : traceless_members) pool.push_back(&b);

    const std::size_t pool_size = pool.size();
    const std::size_t full = pool_size * pool_size;
    ObservableFamily out;
    out.level = fam.level + 1;

    if (full <= max_members) {
        out.sampled = fam.sampled;
        out.members.reserve(full);
        for (const Observable* b1 : pool)
            for (const Observable* b2 : pool)
                out.members.push_back(multiply(*b1, *b2));
        return out;
    }

    out.sampled = true;
    out.members.reserve(max_members);
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, full - 1);
    std::unordered_set<std::size_t> chosen;
    while (chosen.size() < max_members) chosen.insert(pick(rng));
    std::vector<std::size_t> ordered(chosen.begin(), chosen.end());
    std::sort(ordered.begin(), ordered.end());
    for (std::size_t flat : ordered)
        out.members.push_back(
            multiply(*pool[flat / pool_size], *pool[flat % pool_size]));
    return out;
}

/// Seeded thinning of a family before expensive statistics; the result is
/// flagged so downstream maxima read as lower bounds.
inline ObservableFamily subsample(const ObservableFamily& fam,
                                  std::size_t max_members, std::uint64_t seed) {
    if (fam.members.size() <= max_members) return fam;
    ObservableFamily out;
    out.level = fam.level;
    out.sampled = true;
    std::vector<std::size_t> indices(fam.members.size());
    std::iota(indices.begin(), indices.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    std::shuffle(indices.begin(), indices.end(), rng);
    indices.resize(max_members);
    std::sort(indices.begin(), indices.end());
    out.members.reserve(max_members);
    for (std::size_t idx : indices) out.members.push_back(fam.members[idx]);
    return out;
}

// Named generators for the experiment observable M.

inline Observable make_alternating_diagonal(Index n) {
    ComplexVector d(n);
    for (Index k = 0; k < n; ++k) d[k] = (k % 2 == 0) ? 1.0 : -1.0;
    Observable raw = Observable::diagonal(std::move(d));
    if (n % 2 == 0) return traceless(raw);
    Observable centered = traceless(raw);
    return scale(centered, 1.0 / centered.op_norm_bound());
}

inline Observable make_cosine_diagonal(Index n) {
    ComplexVector d(n);
    for (Index k = 0; k < n; ++k)
        d[k] = std::cos(2.0 * std::numbers::pi * static_cast<double>(k) /
                        static_cast<double>(n));
    return Observable::diagonal(std::move(d), true);
}

/// Traceless Hermitian sample with flat complex-Gaussian entries, scaled to
/// unit spectral norm.
inline Observable make_gue_like(Index n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    ComplexMatrix m(n, n);
    for (Index i = 0; i < n; ++i) {
        m(i, i) = normal(rng);
        for (Index j = i + 1; j < n; ++j) {
            const Complex v(normal(rng), normal(rng));
            m(i, j) = v / std::sqrt(2.0);
            m(j, i) = std::conj(v) / std::sqrt(2.0);
        }
    }
    m.diagonal().array() -= normalized_trace(m);
    const double norm =
        detail::hermitian_eigen(m).values.cwiseAbs().maxCoeff();
    return Observable::dense(m / norm, 1.0, true);
}

/// Traceless part of the rank-one projector e_1 e_1^*, at unit norm.
inline Observable make_rank_one_traceless(Index n) {
    if (n < 2) throw ConfigError("rank-one traceless observable needs n >= 2");
    ComplexMatrix m = ComplexMatrix::Zero(n, n);
    m(0, 0) = 1.0;
    m.diagonal().array() -= Complex(1.0 / static_cast<double>(n), 0.0);
    const double norm = 1.0 - 1.0 / static_cast<double>(n);
    return Observable::dense(m / norm, 1.0, true);
}

inline Observable observable_from_json(const nlohmann::json& j, Index n,
                                       std::uint64_t seed) {
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "alternating_diagonal") return make_alternating_diagonal(n);
    if (kind == "cosine_diagonal") return make_cosine_diagonal(n);
    if (kind == "gue_traceless") return make_gue_like(n, seed);
    if (kind == "rank_one_traceless") return make_rank_one_traceless(n);
    if (kind == "explicit") {
        const auto entries = j.at("entries");
        if (entries.size() != static_cast<std::size_t>(n * n))
            throw ConfigError("explicit observable entries must have n*n values");
        ComplexMatrix m(n, n);
        for (Index i = 0; i < n; ++i)
            for (Index j2 = 0; j2 < n; ++j2) {
                const auto& cell = entries[static_cast<std::size_t>(i * n + j2)];
                if (cell.is_array())
                    m(i, j2) = Complex(cell.at(0).get<double>(),
                                       cell.at(1).get<double>());
                else
                    m(i, j2) = cell.get<double>();
            }
        return Observable::dense_exact(std::move(m));
    }
    throw ConfigError("unknown observable kind: " + kind);
}

inline void to_json(nlohmann::json& j, const Observable& b) {
    j = nlohmann::json{{"kind", "explicit"}};
    nlohmann::json entries = nlohmann::json::array();
    const ComplexMatrix m = b.to_dense();
    for (Index i = 0; i < m.rows(); ++i)
        for (Index j2 = 0; j2 < m.cols(); ++j2)
            entries.push_back({m(i, j2).real(), m(i, j2).imag()});
    j["entries"] = std::move(entries);
}

} // namespace gwig
