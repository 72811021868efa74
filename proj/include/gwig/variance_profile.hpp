#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "gwig/eigensolver.hpp"
#include "gwig/errors.hpp"
#include "gwig/linalg.hpp"

namespace gwig {

/// Entry-variance matrix S of a generalized Wigner ensemble: symmetric,
/// nonnegative entries, every row summing to 1. Immutable after construction.
class VarianceProfile {
  public:
    VarianceProfile(RealMatrix entries, std::string kind, double beta = 0.0)
        : s_(std::move(entries)), kind_(std::move(kind)), beta_(beta) {
        if (s_.rows() == 0 || s_.rows() != s_.cols())
            throw ConfigError("variance profile must be square and non-empty");
        c_lower_ = static_cast<double>(s_.rows()) * s_.minCoeff();
    }

    Index n() const { return s_.rows(); }
    const RealMatrix& s() const { return s_; }
    /// n * min_ij S_ij; strictly positive profiles have c_lower > 0.
    double c_lower() const { return c_lower_; }
    const std::string& kind() const { return kind_; }
    double beta() const { return beta_; }

  private:
    RealMatrix s_;
    std::string kind_;
    double beta_;
    double c_lower_;
};

inline VarianceProfile build_flat(Index n) {
    if (n < 1) throw ConfigError("flat profile needs n >= 1");
    RealMatrix s = RealMatrix::Constant(n, n, 1.0 / static_cast<double>(n));
    return VarianceProfile(std::move(s), "flat");
}

/// Circulant generator row b_k = (1 + beta cos(2 pi k / n)) / n of the
/// cosine-circulant family; S = B^2 so sqrt_profile recovers B exactly.
inline RealVector cosine_circulant_row(Index n, double beta) {
    RealVector b(n);
    for (Index k = 0; k < n; ++k)
        b[k] = (1.0 + beta * std::cos(2.0 * std::numbers::pi *
                                      static_cast<double>(k) /
                                      static_cast<double>(n))) /
               static_cast<double>(n);
    return b;
}

inline VarianceProfile build_cosine_circulant(Index n, double beta) {
    if (n < 2) throw ConfigError("cosine profile needs n >= 2");
    if (beta < 0.0 || beta >= 1.0)
        throw ConfigError("cosine profile needs beta in [0, 1)");
    const RealVector b = cosine_circulant_row(n, beta);
    RealMatrix big(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) big(i, j) = b[(i - j + n) % n];
    RealMatrix s = big * big;
    s = ((s + s.transpose()) / 2.0).eval();
    return VarianceProfile(std::move(s), "cosine", beta);
}

inline VarianceProfile build_explicit(RealMatrix entries) {
    return VarianceProfile(std::move(entries), "explicit");
}

/// Seeded valid profile: convex mix of flat, a cosine circulant, and a
/// permutation-conjugated cosine circulant. Entries stay >= c/n with
/// c = w0 + w1 (1-b1)^2 + w2 (1-b2)^2 > 0.
inline VarianceProfile build_random_mix(Index n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double w0 = unit(rng), w1 = unit(rng), w2 = unit(rng);
    const double total = w0 + w1 + w2;
    w0 /= total;
    w1 /= total;
    w2 /= total;
    const double b1 = 0.95 * unit(rng);
    const double b2 = 0.95 * unit(rng);

    std::vector<Index> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), Index{0});
    std::shuffle(perm.begin(), perm.end(), rng);

    const RealMatrix c1 = build_cosine_circulant(n, b1).s();
    const RealMatrix c2 = build_cosine_circulant(n, b2).s();
    RealMatrix permuted(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j)
            permuted(i, j) = c2(perm[static_cast<std::size_t>(i)],
                                perm[static_cast<std::size_t>(j)]);

    RealMatrix s = w0 * build_flat(n).s() + w1 * c1 + w2 * permuted;
    s = ((s + s.transpose()) / 2.0).eval();
    return VarianceProfile(std::move(s), "explicit");
}

struct ProfileTolerances {
    double symmetry = 1e-12;
    double row_sum = 1e-10;
};

struct ValidationReport {
    double symmetry_defect = 0.0;
    double max_row_sum_deviation = 0.0;
    double min_entry = 0.0;
    bool symmetric_ok = false;
    bool row_sums_ok = false;
    bool positive_entries = false;

    bool pass() const { return symmetric_ok && row_sums_ok && positive_entries; }
};

inline ValidationReport validate(const VarianceProfile& profile,
                                 const ProfileTolerances& tol = {}) {
    const RealMatrix& s = profile.s();
    ValidationReport report;
    report.symmetry_defect = (s - s.transpose()).cwiseAbs().maxCoeff();
    report.max_row_sum_deviation =
        (s.rowwise().sum().array() - 1.0).abs().maxCoeff();
    report.min_entry = s.minCoeff();
    report.symmetric_ok = report.symmetry_defect <= tol.symmetry;
    report.row_sums_ok = report.max_row_sum_deviation <= tol.row_sum;
    report.positive_entries = report.min_entry > 0.0;
    return report;
}

/// Principal square root of S with the entrywise Assumption-1 constant:
/// the smallest C >= 1 with 1/(Cn) <= s_tilde_ij <= C/n.
struct SqrtProfile {
    RealMatrix s_tilde;
    double bound_constant = 1.0;
    bool assumption_ok = false;
};

inline SqrtProfile sqrt_profile(const VarianceProfile& profile,
                                bool allow_assumption_failure = false) {
    constexpr double kPsdTolerance = 1e-12;
    const detail::SymmetricEigen eigen = detail::symmetric_eigen(profile.s());

    RealVector roots = eigen.values;
    for (Index i = 0; i < roots.size(); ++i) {
        if (roots[i] < -kPsdTolerance)
            throw NotPsdError("profile has eigenvalue " +
                              std::to_string(roots[i]) + " below -1e-12");
        roots[i] = roots[i] < 0.0 ? 0.0 : std::sqrt(roots[i]);
    }

    SqrtProfile result;
    result.s_tilde = eigen.vectors * roots.asDiagonal() *
                     eigen.vectors.transpose();
    result.s_tilde = ((result.s_tilde + result.s_tilde.transpose()) / 2.0).eval();

    const double n = static_cast<double>(profile.n());
    const double max_entry = result.s_tilde.maxCoeff();
    const double min_entry = result.s_tilde.minCoeff();
    result.assumption_ok = min_entry > 0.0;
    if (!result.assumption_ok) {
        result.bound_constant = std::max(1.0, n * max_entry);
        if (!allow_assumption_failure) {
            Index bad_row = 0, bad_col = 0;
            result.s_tilde.minCoeff(&bad_row, &bad_col);
            throw AssumptionViolatedError(
                "sqrt profile entry (" + std::to_string(bad_row) + ", " +
                std::to_string(bad_col) + ") = " + std::to_string(min_entry) +
                " is not positive");
        }
    } else {
        result.bound_constant =
            std::max({1.0, n * max_entry, 1.0 / (n * min_entry)});
    }
    return result;
}

/// Stability operator C = S - 11^T/N with its cached eigendecomposition;
/// the kernel (I - factor*C)^{-1} is applied through it in O(n^2).
struct StabilityOperator {
    RealMatrix c_matrix;
    double spectral_radius = 0.0;
    RealMatrix eigenvectors;
    RealVector eigenvalues;
};

inline StabilityOperator stability_radius(const VarianceProfile& profile) {
    const Index n = profile.n();
    StabilityOperator op;
    op.c_matrix = profile.s().array() - 1.0 / static_cast<double>(n);
    detail::SymmetricEigen eigen = detail::symmetric_eigen(op.c_matrix);
    op.eigenvectors = std::move(eigen.vectors);
    op.eigenvalues = std::move(eigen.values);
    op.spectral_radius = op.eigenvalues.cwiseAbs().maxCoeff();
    return op;
}

/// Solves (I - factor*C) x = rhs. One refinement pass keeps the residual at
/// rounding level even when the factor sits close to the stability margin.
inline ComplexVector stability_solve(const StabilityOperator& op, Complex factor,
                                     const ComplexVector& rhs) {
    if (std::abs(factor) * op.spectral_radius >= 1.0 - 1e-8)
        throw NearSingularError("|factor| * spectral_radius too close to 1");

    const auto apply_inverse = [&](const ComplexVector& v) -> ComplexVector {
        ComplexVector w = op.eigenvectors.transpose() * v;
        for (Index i = 0; i < w.size(); ++i)
            w[i] /= (1.0 - factor * op.eigenvalues[i]);
        return op.eigenvectors * w;
    };

    ComplexVector x = apply_inverse(rhs);
    const ComplexVector residual = rhs - (x - factor * (op.c_matrix * x));
    x += apply_inverse(residual);
    return x;
}

inline void to_json(nlohmann::json& j, const VarianceProfile& profile) {
    j = nlohmann::json{{"n", profile.n()}, {"kind", profile.kind()}};
    if (profile.kind() == "cosine") j["beta"] = profile.beta();
    if (profile.kind() == "explicit") {
        std::vector<double> entries;
        entries.reserve(static_cast<std::size_t>(profile.n() * profile.n()));
        for (Index i = 0; i < profile.n(); ++i)
            for (Index j2 = 0; j2 < profile.n(); ++j2)
                entries.push_back(profile.s()(i, j2));
        j["entries"] = std::move(entries);
    }
}

inline VarianceProfile variance_profile_from_json(const nlohmann::json& j) {
    const auto n = j.at("n").get<Index>();
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "flat") return build_flat(n);
    if (kind == "cosine") return build_cosine_circulant(n, j.at("beta").get<double>());
    if (kind == "explicit") {
        const auto entries = j.at("entries").get<std::vector<double>>();
        if (entries.size() != static_cast<std::size_t>(n * n))
            throw ConfigError("explicit profile entries must have n*n values");
        RealMatrix s(n, n);
        for (Index i = 0; i < n; ++i)
            for (Index j2 = 0; j2 < n; ++j2)
                s(i, j2) = entries[static_cast<std::size_t>(i * n + j2)];
        return build_explicit(std::move(s));
    }
    throw ConfigError("unknown profile kind: " + kind);
}

} // namespace gwig
