#pragma once

#include <complex>

#include <Eigen/Dense>

namespace risfair {

template <typename Scalar>
using Dense = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using DenseVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Complex = std::complex<double>;
using ComplexMatrix = Dense<Complex>;
using ComplexVector = DenseVector<Complex>;
using RealMatrix = Dense<double>;
using RealVector = DenseVector<double>;
using Index = Eigen::Index;

}  // namespace risfair
