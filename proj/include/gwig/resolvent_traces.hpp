#pragma once

#include <cmath>
#include <complex>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "gwig/ensemble.hpp"
#include "gwig/errors.hpp"
#include "gwig/linalg.hpp"
#include "gwig/observables.hpp"
#include "gwig/spectral.hpp"

namespace gwig {

enum class ResolventFlavor { plain, adjoint, transpose, imaginary };

struct ResolventSpec {
    Complex z;
    ResolventFlavor flavor = ResolventFlavor::plain;
};

inline std::string flavor_name(ResolventFlavor flavor) {
    switch (flavor) {
        case ResolventFlavor::plain: return "G";
        case ResolventFlavor::adjoint: return "G*";
        case ResolventFlavor::transpose: return "G^t";
        case ResolventFlavor::imaginary: return "Im G";
    }
    throw ConfigError("unknown resolvent flavor");
}

/// Scalar symbol applied to an eigenvalue: every flavor of G is a spectral
/// function of the same eigenbasis.
inline Complex resolvent_symbol(double lambda, const ResolventSpec& spec) {
    const Complex g = 1.0 / (lambda - spec.z);
    switch (spec.flavor) {
        case ResolventFlavor::plain:
        case ResolventFlavor::transpose: return g;
        case ResolventFlavor::adjoint: return std::conj(g);
        case ResolventFlavor::imaginary: return Complex(g.imag(), 0.0);
    }
    throw ConfigError("unknown resolvent flavor");
}

inline ComplexVector resolvent_symbols(const SpectralDecomposition& decomp,
                                       const ResolventSpec& spec) {
    if (spec.z.imag() == 0.0)
        throw ConfigError("resolvent requires Im z != 0");
    ComplexVector g(decomp.lambdas.size());
    for (Index i = 0; i < g.size(); ++i)
        g[i] = resolvent_symbol(decomp.lambdas[i], spec);
    return g;
}

/// Dense resolvent matrix U diag(g) U^* (transpose flavor transposes it).
inline ComplexMatrix resolvent_matrix(const SpectralDecomposition& decomp,
                                      const ResolventSpec& spec) {
    const ComplexVector g = resolvent_symbols(decomp, spec);
    ComplexMatrix m =
        decomp.vectors * g.asDiagonal() * decomp.vectors.adjoint();
    if (spec.flavor == ResolventFlavor::transpose) m.transposeInPlace();
    return m;
}

/// O_ij = <u_i, A u_j>, or <u_i, A conj(u_j)> when conjugated.
struct OverlapMatrix {
    ComplexMatrix entries;
    bool conjugated = false;
};

inline ComplexMatrix observable_times_vectors(const Observable& a,
                                              const ComplexMatrix& u) {
    if (a.is_diagonal()) return a.diagonal_entries().asDiagonal() * u;
    return a.dense_entries() * u;
}

inline OverlapMatrix overlap(const SpectralDecomposition& decomp,
                             const Observable& a, bool conjugated = false) {
    if (a.n() != decomp.vectors.rows())
        throw ConfigError("overlap dimension mismatch");
    OverlapMatrix out;
    out.conjugated = conjugated;
    const ComplexMatrix right =
        conjugated ? decomp.vectors.conjugate() : decomp.vectors;
    out.entries = decomp.vectors.adjoint() * observable_times_vectors(a, right);
    return out;
}

/// <G(z) A> by the exact spectral sum (1/N) sum_i O_ii / (lambda_i - z).
inline Complex trace_ga(const SpectralDecomposition& decomp,
                        const Observable& a, Complex z) {
    if (z.imag() == 0.0) throw ConfigError("trace_ga requires Im z != 0");
    const Index n = decomp.lambdas.size();
    const ComplexMatrix au = observable_times_vectors(a, decomp.vectors);
    Complex total = 0.0;
    for (Index i = 0; i < n; ++i) {
        const Complex o_ii = decomp.vectors.col(i).dot(au.col(i));
        total += o_ii / (decomp.lambdas[i] - z);
    }
    return total / static_cast<double>(n);
}

/// <G_1 A G_2 B> assembled spectrally:
/// (1/N) sum_ij g1(lambda_i) O^A_ij g2(lambda_j) O^B_ji. A single transpose
/// flavor is rendered through conjugated overlaps; double transposes are
/// rejected (they reduce to plain flavors with transposed observables).
inline Complex trace_two(const SpectralDecomposition& decomp,
                         const Observable& a, const Observable& b,
                         const ResolventSpec& r1, const ResolventSpec& r2) {
    const bool t1 = r1.flavor == ResolventFlavor::transpose;
    const bool t2 = r2.flavor == ResolventFlavor::transpose;
    if (t1 && t2)
        throw UnsupportedFlavorsError(
            "trace_two does not support two transpose flavors");
    if (t1) {
        // <G_1^t A G_2 B> = <G_2 B G_1^t A> by cyclicity.
        return trace_two(decomp, b, a, r2, r1);
    }

    const ComplexVector g1 = resolvent_symbols(decomp, r1);
    const ComplexVector g2 = resolvent_symbols(decomp, r2);
    const Index n = decomp.lambdas.size();
    const ComplexMatrix& u = decomp.vectors;

    ComplexMatrix oa, ob;
    if (!t2) {
        oa = u.adjoint() * observable_times_vectors(a, u);
        ob = u.adjoint() * observable_times_vectors(b, u);
    } else {
        // <G_1 A G_2^t B> = (1/N) sum g1_i <u_i, A conj(u_j)> g2_j <conj(u_j), B u_i>.
        oa = u.adjoint() * observable_times_vectors(a, u.conjugate());
        ob = u.transpose() * observable_times_vectors(b, u);
    }

    const ComplexMatrix left = g1.asDiagonal() * oa;
    const ComplexMatrix right = g2.asDiagonal() * ob;
    return (left.array() * right.transpose().array()).sum() /
           static_cast<double>(n);
}

/// Normalized trace of a renormalized (underlined) product.
struct RenormalizedTrace {
    Complex value;
    std::string chain;
};

namespace detail {

inline void require_complex_law(const WignerSample& sample) {
    if (!is_complex_law(sample.law))
        throw UnsupportedLawError(
            "renormalization implements only complex-Hermitian contraction rules");
}

/// tr(X Y)/N without forming the product.
inline Complex trace_product(const ComplexMatrix& x, const ComplexMatrix& y) {
    return (x.array() * y.transpose().array()).sum() /
           static_cast<double>(x.rows());
}

/// <diag(S diagvec(X)) Y> = (1/N) sum_i (S diagvec(X))_i Y_ii.
inline Complex diag_contraction(const RealMatrix& s, const ComplexMatrix& x,
                                const ComplexMatrix& y) {
    const ComplexVector d = s * x.diagonal();
    return (d.array() * y.diagonal().array()).sum() /
           static_cast<double>(s.rows());
}

/// Expansion of one flavor into pure plain/adjoint terms with coefficients;
/// Im G = (G - G*) / (2i).
inline std::vector<std::pair<Complex, ResolventFlavor>> pure_terms(
    ResolventFlavor flavor) {
    switch (flavor) {
        case ResolventFlavor::plain:
            return {{Complex(1.0, 0.0), ResolventFlavor::plain}};
        case ResolventFlavor::adjoint:
            return {{Complex(1.0, 0.0), ResolventFlavor::adjoint}};
        case ResolventFlavor::imaginary:
            return {{Complex(0.0, -0.5), ResolventFlavor::plain},
                    {Complex(0.0, 0.5), ResolventFlavor::adjoint}};
        case ResolventFlavor::transpose:
            throw UnsupportedChainError(
                "transpose flavors are excluded from renormalized products");
    }
    throw ConfigError("unknown resolvent flavor");
}

} // namespace detail

/// <underline{W G A}> = <W G A> + <diag(S diagvec(G)) G A> for pure flavors;
/// the Im flavor expands linearly so the exact Gaussian zero-mean survives.
inline RenormalizedTrace renormalized_wga(const WignerSample& sample,
                                          const SpectralDecomposition& decomp,
                                          const Observable& a, Complex z,
                                          ResolventFlavor flavor) {
    detail::require_complex_law(sample);
    const VarianceProfile& profile = sample.variance_profile();
    RenormalizedTrace out;
    out.chain = "W " + flavor_name(flavor) + " A";
    out.value = 0.0;
    for (const auto& [coeff, pure] : detail::pure_terms(flavor)) {
        const ComplexMatrix g = resolvent_matrix(decomp, {z, pure});
        const ComplexMatrix ga = g * a.to_dense();
        const Complex value = detail::trace_product(sample.w, ga) +
                              detail::diag_contraction(profile.s(), g, ga);
        out.value += coeff * value;
    }
    return out;
}

struct ChainLink {
    ResolventSpec resolvent;
    Observable observable;
};

/// <underline{W G_1 B_1}> or <underline{W G_1 B_1 G_2 B_2}>, one subtraction
/// term per resolvent: for the two-resolvent chain the subtractions are
/// <diag(S diagvec(G_1)) G_1 B_1 G_2 B_2> and <diag(S diagvec(G_1 B_1 G_2)) G_2 B_2>.
inline RenormalizedTrace renormalized_chain(const WignerSample& sample,
                                            const SpectralDecomposition& decomp,
                                            const std::vector<ChainLink>& chain) {
    detail::require_complex_law(sample);
    const VarianceProfile& profile = sample.variance_profile();
    if (chain.empty() || chain.size() > 2)
        throw UnsupportedChainError("chains carry one or two resolvents");

    RenormalizedTrace out;
    out.chain = "W";
    for (const ChainLink& link : chain)
        out.chain += " " + flavor_name(link.resolvent.flavor) + " B";
    out.value = 0.0;

    if (chain.size() == 1) {
        const RenormalizedTrace single =
            renormalized_wga(sample, decomp, chain[0].observable,
                             chain[0].resolvent.z, chain[0].resolvent.flavor);
        out.value = single.value;
        return out;
    }

    const auto terms1 = detail::pure_terms(chain[0].resolvent.flavor);
    const auto terms2 = detail::pure_terms(chain[1].resolvent.flavor);
    const ComplexMatrix b1 = chain[0].observable.to_dense();
    const ComplexMatrix b2 = chain[1].observable.to_dense();
    for (const auto& [c1, f1] : terms1) {
        const ComplexMatrix g1 =
            resolvent_matrix(decomp, {chain[0].resolvent.z, f1});
        const ComplexMatrix g1b1 = g1 * b1;
        for (const auto& [c2, f2] : terms2) {
            const ComplexMatrix g2 =
                resolvent_matrix(decomp, {chain[1].resolvent.z, f2});
            const ComplexMatrix g1b1g2 = g1b1 * g2;
            const ComplexMatrix product = g1b1g2 * b2;
            const ComplexMatrix g2b2 = g2 * b2;
            const Complex value =
                detail::trace_product(sample.w, product) +
                detail::diag_contraction(profile.s(), g1, product) +
                detail::diag_contraction(profile.s(), g1b1g2, g2b2);
            out.value += c1 * c2 * value;
        }
    }
    return out;
}

/// Scale-relative residual of the exact identity
/// <GA> = -m <underline{WGA}> + m (1/N) sum_ij S_ij (G_jj - m) (GA)_ii
/// for traceless A; zero up to rounding on every sample.
inline double identity_residual_fundga(const WignerSample& sample,
                                       const SpectralDecomposition& decomp,
                                       const Observable& a, Complex z) {
    detail::require_complex_law(sample);
    const VarianceProfile& profile = sample.variance_profile();
    if (!a.traceless() && std::abs(a.mean()) > 1e-12)
        throw ConfigError("identity_residual_fundga requires traceless A");
    const Complex m = stieltjes_m(z).m;
    const ComplexMatrix g = resolvent_matrix(decomp, {z, ResolventFlavor::plain});
    const ComplexMatrix ga = g * a.to_dense();
    const Complex trace_ga_value = normalized_trace(ga);

    const Complex underline = detail::trace_product(sample.w, ga) +
                              detail::diag_contraction(profile.s(), g, ga);

    const ComplexVector centered = g.diagonal().array() - m;
    const Complex s_term = (ga.diagonal().array() *
                            (profile.s() * centered.matrix()).array())
                               .sum() /
                           static_cast<double>(profile.n());

    const Complex residual = trace_ga_value + m * underline - m * s_term;
    return std::abs(residual) / (1.0 + std::abs(trace_ga_value));
}

/// Scale-relative residual of the square-root splitting
/// (1/N) sum_ij S_ij (G_jj - m)(GA)_ii =
///   (1/N) sum_mu <GA N diag S~_mu> <G N diag S~_mu^o> + <GA><G - mI>.
inline double identity_residual_splitting(const WignerSample& sample,
                                          const SpectralDecomposition& decomp,
                                          const Observable& a, Complex z,
                                          const SqrtProfile& sq) {
    detail::require_complex_law(sample);
    const VarianceProfile& profile = sample.variance_profile();
    if (!sq.assumption_ok)
        throw AssumptionViolatedError("splitting requires Assumption 1");
    const Complex m = stieltjes_m(z).m;
    const double n = static_cast<double>(profile.n());
    const ComplexMatrix g = resolvent_matrix(decomp, {z, ResolventFlavor::plain});
    const ComplexMatrix ga = g * a.to_dense();

    const ComplexVector centered = g.diagonal().array() - m;
    const Complex lhs =
        (ga.diagonal().array() * (profile.s() * centered.matrix()).array())
            .sum() /
        n;

    const RealMatrix s_tilde_o = sq.s_tilde.array() - 1.0 / n;
    const ComplexVector left = sq.s_tilde * ga.diagonal();
    const ComplexVector right = s_tilde_o * g.diagonal();
    const Complex rhs = (left.array() * right.array()).sum() / n +
                        normalized_trace(ga) * (normalized_trace(g) - m);

    return std::abs(lhs - rhs) / (1.0 + std::abs(lhs));
}

} // namespace gwig
