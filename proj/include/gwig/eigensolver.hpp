#pragma once

#include <complex>

#define LAPACK_COMPLEX_CUSTOM
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include "gwig/errors.hpp"
#include "gwig/linalg.hpp"

namespace gwig::detail {

/// Divide-and-conquer eigendecomposition of a real symmetric matrix.
/// Eigenvalues come out ascending, eigenvectors in the columns.
struct SymmetricEigen {
    RealVector values;
    RealMatrix vectors;
};

inline SymmetricEigen symmetric_eigen(const RealMatrix& a) {
    SymmetricEigen out;
    out.vectors = a;
    out.values.resize(a.rows());
    const auto info = LAPACKE_dsyevd(
        LAPACK_COL_MAJOR, 'V', 'L', static_cast<lapack_int>(a.rows()),
        out.vectors.data(), static_cast<lapack_int>(a.rows()), out.values.data());
    if (info != 0)
        throw ConvergenceFailureError("dsyevd failed with info " +
                                      std::to_string(info));
    return out;
}

struct HermitianEigen {
    RealVector values;
    ComplexMatrix vectors;
};

inline HermitianEigen hermitian_eigen(const ComplexMatrix& a) {
    HermitianEigen out;
    out.vectors = a;
    out.values.resize(a.rows());
    const auto info = LAPACKE_zheevd(
        LAPACK_COL_MAJOR, 'V', 'L', static_cast<lapack_int>(a.rows()),
        out.vectors.data(), static_cast<lapack_int>(a.rows()), out.values.data());
    if (info != 0)
        throw ConvergenceFailureError("zheevd failed with info " +
                                      std::to_string(info));
    return out;
}

} // namespace gwig::detail
