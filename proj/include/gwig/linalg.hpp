#pragma once

#include <complex>
#include <cstdint>

#include <Eigen/Dense>

namespace gwig {

using Complex = std::complex<double>;
using Index = Eigen::Index;

using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

inline constexpr Complex kImagUnit{0.0, 1.0};

/// Normalized trace <M> = tr(M)/n.
template <typename Derived>
auto normalized_trace(const Eigen::MatrixBase<Derived>& m) {
    return m.trace() / static_cast<double>(m.rows());
}

} // namespace gwig
