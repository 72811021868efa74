#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "gwig/eigensolver.hpp"
#include "gwig/ensemble.hpp"
#include "gwig/errors.hpp"
#include "gwig/linalg.hpp"

namespace gwig {

/// Semicircle Stieltjes data at z = E + i eta. m solves m^2 + z m + 1 = 0 on
/// the branch with sign(Im m) = sign(Im z); rho = Im m; ell = N eta rho when
/// a matrix size is supplied.
struct SpectralPoint {
    Complex z;
    Complex m;
    double rho = 0.0;
    double ell = 0.0;
};

inline SpectralPoint stieltjes_m(Complex z, Index n = 0) {
    if (z.imag() == 0.0) throw ConfigError("stieltjes_m requires Im z != 0");
    const Complex root = std::sqrt(z * z - 4.0);
    Complex m = (-z + root) / 2.0;
    if (m.imag() * z.imag() <= 0.0) m = (-z - root) / 2.0;

    SpectralPoint point;
    point.z = z;
    point.m = m;
    point.rho = m.imag();
    point.ell = static_cast<double>(n) * z.imag() * point.rho;
    return point;
}

inline double semicircle_density(double x) {
    const double t = 4.0 - x * x;
    return t <= 0.0 ? 0.0 : std::sqrt(t) / (2.0 * std::numbers::pi);
}

/// Cumulative semicircle mass on (-2, x], in closed form.
inline double semicircle_cdf(double x) {
    if (x <= -2.0) return 0.0;
    if (x >= 2.0) return 1.0;
    return 0.5 + (x * std::sqrt(4.0 - x * x) + 4.0 * std::asin(x / 2.0)) /
                     (4.0 * std::numbers::pi);
}

/// Harmonic extension of the semicircle density by direct quadrature:
/// rho(E + i eta) = int eta rho_sc(x) / ((x-E)^2 + eta^2) dx. Independent
/// route to Im m; the substitution x = 2 sin t removes the edge square roots
/// and the domain is split at the peak so the kernel stays resolvable at
/// small eta.
inline double rho_integral(double E, double eta) {
    if (eta <= 0.0) throw ConfigError("rho_integral requires eta > 0");
    const auto integrand = [E, eta](double t) {
        const double c = std::cos(t);
        const double d = 2.0 * std::sin(t) - E;
        return (2.0 / std::numbers::pi) * eta * c * c / (d * d + eta * eta);
    };
    using quad = boost::math::quadrature::gauss_kronrod<double, 31>;
    const double half_pi = std::numbers::pi / 2.0;
    double split = 0.0;
    if (E > -2.0 && E < 2.0) split = std::asin(E / 2.0);
    double value = quad::integrate(integrand, -half_pi, split, 20, 1e-12);
    value += quad::integrate(integrand, split, half_pi, 20, 1e-12);
    return value;
}

/// Classical eigenvalue locations, decreasing: N * mass((gamma_i, 2]) = i - 1/2.
struct ClassicalLocations {
    RealVector gammas;
};

inline ClassicalLocations classical_locations(Index n) {
    if (n < 1) throw ConfigError("classical_locations requires n >= 1");
    ClassicalLocations out;
    out.gammas.resize(n);
    for (Index i = 1; i <= n; ++i) {
        const double target =
            1.0 - (static_cast<double>(i) - 0.5) / static_cast<double>(n);
        double lo = -2.0, hi = 2.0;
        while (hi - lo > 1e-10) {
            const double mid = (lo + hi) / 2.0;
            (semicircle_cdf(mid) < target ? lo : hi) = mid;
        }
        out.gammas[i - 1] = (lo + hi) / 2.0;
    }
    return out;
}

/// Unique eta with N eta rho(E + i eta) = J, by bisection on the increasing
/// window-mass map.
inline double window_eta(double E, double J, Index n) {
    if (J <= 0.0) throw ConfigError("window_eta requires J > 0");
    if (std::abs(E) >= 2.0) throw ConfigError("window_eta requires |E| < 2");
    const double N = static_cast<double>(n);
    const auto mass = [&](double eta) {
        return N * eta * stieltjes_m(Complex(E, eta)).m.imag();
    };
    double lo = 1.0 / (N * N), hi = N;
    if (mass(lo) > J || mass(hi) < J)
        throw NoSolutionError("window mass bracket does not straddle J");
    for (int iter = 0; iter < 200; ++iter) {
        const double mid = std::midpoint(lo, hi);
        (mass(mid) < J ? lo : hi) = mid;
        if (std::abs(mass(mid) - J) <= 1e-9 * J) break;
    }
    const double eta = std::midpoint(lo, hi);
    if (std::abs(mass(eta) - J) > 1e-8 * J)
        throw NoSolutionError("window_eta bisection failed to converge");
    return eta;
}

/// Eigenpairs in the paper's order: lambda_1 >= lambda_2 >= ... >= lambda_N.
struct SpectralDecomposition {
    RealVector lambdas;
    ComplexMatrix vectors;
};

inline SpectralDecomposition decompose(const WignerSample& sample) {
    const detail::HermitianEigen eigen = detail::hermitian_eigen(sample.w);
    SpectralDecomposition out;
    out.lambdas = eigen.values.reverse();
    out.vectors = eigen.vectors.rowwise().reverse();
    return out;
}

/// max_i |lambda_i - gamma_i| / (min(i, N-i+1)^{-1/3} N^{-2/3}).
inline double rigidity_excess(const SpectralDecomposition& decomp,
                              const ClassicalLocations& gammas) {
    const Index n = decomp.lambdas.size();
    if (gammas.gammas.size() != n)
        throw ConfigError("rigidity_excess dimension mismatch");
    const double n23 = std::pow(static_cast<double>(n), -2.0 / 3.0);
    double worst = 0.0;
    for (Index i = 1; i <= n; ++i) {
        const double edge = static_cast<double>(std::min(i, n - i + 1));
        const double envelope = std::pow(edge, -1.0 / 3.0) * n23;
        worst = std::max(worst,
                         std::abs(decomp.lambdas[i - 1] - gammas.gammas[i - 1]) /
                             envelope);
    }
    return worst;
}

} // namespace gwig
