#pragma once

#include <cmath>
#include <complex>
#include <string>

#include <Eigen/Dense>

#include "gwig/errors.hpp"
#include "gwig/linalg.hpp"
#include "gwig/observables.hpp"
#include "gwig/spectral.hpp"
#include "gwig/variance_profile.hpp"

namespace gwig {

/// Deterministic value of <G(z1) A1 G(z2) A2> for traceless A1, A2:
/// m1 m2 <A1 A2> plus the stability-operator correction
/// m1 m2 (1/N) sum_{ab} (A1)_aa [S (I - m1 m2 C)^{-1}]_{ab} (A2)_bb.
struct TwoResolventPrediction {
    Complex main_term;
    Complex correction;
    Complex total;
};

namespace detail {

inline void require_traceless(const Observable& a, const char* role) {
    if (!a.traceless() && std::abs(a.mean()) > 1e-12)
        throw ConfigError(std::string("two-resolvent prediction requires ") +
                          role + " traceless");
}

} // namespace detail

inline TwoResolventPrediction predict_two_resolvent(
    const VarianceProfile& profile, const StabilityOperator& op,
    const Observable& a1, const Observable& a2, Complex z1, Complex z2) {
    detail::require_traceless(a1, "A1");
    detail::require_traceless(a2, "A2");
    const Complex m1 = stieltjes_m(z1).m;
    const Complex m2 = stieltjes_m(z2).m;
    const Complex factor = m1 * m2;
    const double n = static_cast<double>(profile.n());

    TwoResolventPrediction out;
    if (a1.is_diagonal() && a2.is_diagonal())
        out.main_term = factor * (a1.diagonal_entries().array() *
                                  a2.diagonal_entries().array())
                                     .sum() /
                        n;
    else
        out.main_term = factor * normalized_trace(ComplexMatrix(
                                     a1.to_dense() * a2.to_dense()));

    const ComplexVector solved = stability_solve(op, factor, a2.diagonal_part());
    const ComplexVector weighted = profile.s() * solved;
    const Complex bilinear =
        (a1.diagonal_part().array() * weighted.array()).sum();
    out.correction = factor * bilinear / n;
    out.total = out.main_term + out.correction;
    return out;
}

inline TwoResolventPrediction predict_two_resolvent(const VarianceProfile& profile,
                                                    const Observable& a1,
                                                    const Observable& a2,
                                                    Complex z1, Complex z2) {
    return predict_two_resolvent(profile, stability_radius(profile), a1, a2, z1,
                                 z2);
}

/// Flavor combinations assembled from the plain formula with m(conj z) =
/// conj m(z): G*(z) = G(conj z), Im G = (G - G*)/(2i).
struct ImCombinationPrediction {
    Complex gg;           ///< <G(z1) A1 G(z2) A2>
    Complex g_gstar;      ///< <G(z1) A1 G*(z2) A2>
    Complex gstar_g;      ///< <G*(z1) A1 G(z2) A2>
    Complex im_im;        ///< <Im G(z1) A1 Im G(z2) A2>
};

inline ImCombinationPrediction predict_im_combinations(
    const VarianceProfile& profile, const StabilityOperator& op,
    const Observable& a1, const Observable& a2, Complex z1, Complex z2) {
    const auto value = [&](Complex w1, Complex w2) {
        return predict_two_resolvent(profile, op, a1, a2, w1, w2).total;
    };
    ImCombinationPrediction out;
    out.gg = value(z1, z2);
    out.g_gstar = value(z1, std::conj(z2));
    out.gstar_g = value(std::conj(z1), z2);
    const Complex gstar_gstar = value(std::conj(z1), std::conj(z2));
    out.im_im = -(out.gg - out.g_gstar - out.gstar_g + gstar_gstar) / 4.0;
    return out;
}

inline ImCombinationPrediction predict_im_combinations(
    const VarianceProfile& profile, const Observable& a1, const Observable& a2,
    Complex z1, Complex z2) {
    return predict_im_combinations(profile, stability_radius(profile), a1, a2,
                                   z1, z2);
}

enum class EnvelopeKind { local_law, rigidity, eth };

/// High-probability envelopes from the a-priori estimates:
/// local_law -> sqrt(rho/(N eta)) + 1/(N eta) at z,
/// rigidity -> min(i, N-i+1)^{-1/3} N^{-2/3},
/// eth -> N^{xi - 1/2}.
inline double envelope_local_law(Index n, Complex z) {
    const double eta = z.imag();
    if (eta <= 0.0) throw ConfigError("local-law envelope requires Im z > 0");
    const double rho = stieltjes_m(z).m.imag();
    const double n_eta = static_cast<double>(n) * eta;
    return std::sqrt(rho / n_eta) + 1.0 / n_eta;
}

inline double envelope_rigidity(Index n, Index i) {
    if (i < 1 || i > n) throw ConfigError("rigidity envelope index out of range");
    const double edge = static_cast<double>(std::min(i, n - i + 1));
    return std::pow(edge, -1.0 / 3.0) *
           std::pow(static_cast<double>(n), -2.0 / 3.0);
}

inline double envelope_eth(Index n, double xi) {
    return std::pow(static_cast<double>(n), xi - 0.5);
}

struct EnvelopeParams {
    Index n = 0;
    Complex z;
    Index i = 1;
    double xi = 0.0;
};

inline double envelope(EnvelopeKind kind, const EnvelopeParams& params) {
    switch (kind) {
        case EnvelopeKind::local_law: return envelope_local_law(params.n, params.z);
        case EnvelopeKind::rigidity: return envelope_rigidity(params.n, params.i);
        case EnvelopeKind::eth: return envelope_eth(params.n, params.xi);
    }
    throw ConfigError("unknown envelope kind");
}

} // namespace gwig
