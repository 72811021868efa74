#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "gwig/errors.hpp"
#include "gwig/linalg.hpp"
#include "gwig/observables.hpp"
#include "gwig/resolvent_traces.hpp"
#include "gwig/spectral.hpp"

namespace gwig {

/// Window of half-width J centered at 1-based eigenvalue indices (i0, j0);
/// windows are clipped to [1, n] but the (2J)^2 normalization is kept.
struct WindowSpec {
    Index i0 = 1;
    Index j0 = 1;
    Index j_width = 1;
};

struct XiStatistic {
    double value = 0.0;
    WindowSpec argmax_window;
    bool conjugated = false;
};

/// Xi_A(J) = N/(2J)^2 max_{i0,j0} sum_{|i-i0|<=J, |j-j0|<=J} |O_ij|^2,
/// exact over all centers via a 2D prefix-sum table; ties break toward the
/// smallest (i0, j0).
inline XiStatistic xi(const OverlapMatrix& o, Index j_width) {
    if (j_width < 1) throw ConfigError("xi requires J >= 1");
    const Index n = o.entries.rows();
    const double j = static_cast<double>(j_width);

    // prefix(i, j) = sum of |O|^2 over the leading i x j block.
    RealMatrix prefix = RealMatrix::Zero(n + 1, n + 1);
    for (Index r = 0; r < n; ++r)
        for (Index c = 0; c < n; ++c)
            prefix(r + 1, c + 1) = std::norm(o.entries(r, c)) + prefix(r, c + 1) +
                                   prefix(r + 1, c) - prefix(r, c);

    const auto window_sum = [&](Index i0, Index j0) {
        const Index rlo = std::max<Index>(1, i0 - j_width) - 1;
        const Index rhi = std::min<Index>(n, i0 + j_width);
        const Index clo = std::max<Index>(1, j0 - j_width) - 1;
        const Index chi = std::min<Index>(n, j0 + j_width);
        return prefix(rhi, chi) - prefix(rlo, chi) - prefix(rhi, clo) +
               prefix(rlo, clo);
    };

    XiStatistic out;
    out.conjugated = o.conjugated;
    out.argmax_window = {1, 1, j_width};
    double best = -1.0;
    for (Index i0 = 1; i0 <= n; ++i0)
        for (Index j0 = 1; j0 <= n; ++j0) {
            const double mass = window_sum(i0, j0);
            if (mass > best) {
                best = mass;
                out.argmax_window = {i0, j0, j_width};
            }
        }
    out.value = static_cast<double>(n) * best / (4.0 * j * j);
    return out;
}

/// max_ij |O_ij - delta_ij <A>|.
inline double eth_max(const OverlapMatrix& o, Complex a_mean) {
    ComplexMatrix centered = o.entries;
    centered.diagonal().array() -= a_mean;
    return centered.cwiseAbs().maxCoeff();
}

struct LambdaEstimate {
    int k = 0;
    double value = 1.0;
    bool families_sampled = false;
};

/// Lambda_k = max_{B in M_k^o} Xi_B + max_{B in M_k} Xi-bar_B + 1, taken over
/// the given (possibly subsampled) families.
inline LambdaEstimate lambda_k(const SpectralDecomposition& decomp,
                               const std::vector<ObservableFamily>& families,
                               Index j_width) {
    if (families.empty()) throw ConfigError("lambda_k needs a family");
    LambdaEstimate out;
    double max_xi = 0.0;
    double max_xi_bar = 0.0;
    for (const ObservableFamily& fam : families) {
        out.k = std::max(out.k, fam.level);
        out.families_sampled = out.families_sampled || fam.sampled;
        for (const Observable& member : fam.members) {
            max_xi_bar = std::max(
                max_xi_bar, xi(overlap(decomp, member, true), j_width).value);
            const Observable centered = traceless(member);
            max_xi = std::max(
                max_xi, xi(overlap(decomp, centered, false), j_width).value);
        }
    }
    out.value = max_xi + max_xi_bar + 1.0;
    return out;
}

/// Ratio of the window-tuned two-resolvent trace to the windowed overlap mass:
/// <Im G(z1) A Im G(z2) A*> / (rho1 rho2) over N/(2J)^2 sum_window |O_ij|^2
/// with E_i = gamma_{i0}, gamma_{j0} and eta_i solving N eta rho = J.
inline double bridge_ratio(const SpectralDecomposition& decomp,
                           const Observable& a, Index i0, Index j0,
                           Index j_width) {
    const Index n = decomp.lambdas.size();
    if (i0 < 1 || i0 > n || j0 < 1 || j0 > n)
        throw ConfigError("bridge_ratio centers out of range");
    const ClassicalLocations gammas = classical_locations(n);
    const double e1 = gammas.gammas[i0 - 1];
    const double e2 = gammas.gammas[j0 - 1];
    const double j = static_cast<double>(j_width);

    const double eta1 = window_eta(e1, j, n);
    const double eta2 = window_eta(e2, j, n);
    const Complex z1(e1, eta1), z2(e2, eta2);
    const double rho1 = stieltjes_m(z1).m.imag();
    const double rho2 = stieltjes_m(z2).m.imag();

    const Complex numerator =
        trace_two(decomp, a, adjoint(a), {z1, ResolventFlavor::imaginary},
                  {z2, ResolventFlavor::imaginary});

    const OverlapMatrix o = overlap(decomp, a, false);
    const Index rlo = std::max<Index>(1, i0 - j_width);
    const Index rhi = std::min<Index>(n, i0 + j_width);
    const Index clo = std::max<Index>(1, j0 - j_width);
    const Index chi = std::min<Index>(n, j0 + j_width);
    double mass = 0.0;
    for (Index r = rlo; r <= rhi; ++r)
        for (Index c = clo; c <= chi; ++c) mass += std::norm(o.entries(r - 1, c - 1));
    const double denominator = static_cast<double>(n) * mass / (4.0 * j * j);

    return numerator.real() / (rho1 * rho2 * denominator);
}

} // namespace gwig
