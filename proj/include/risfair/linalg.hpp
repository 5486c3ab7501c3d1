#pragma once

#include <stdexcept>
#include <string>

#include <unsupported/Eigen/KroneckerProduct>

#include "risfair/types.hpp"

namespace risfair {

/// Raised when a matrix that must have full (row) rank does not.
struct RankDeficientError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Raised when a linear system stays singular even after ridge regularization.
struct SingularSystemError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Moore-Penrose pseudo-inverse via SVD. Singular values below
/// rel_tol * sigma_max are treated as zero.
ComplexMatrix pinv(const ComplexMatrix& a, double rel_tol = 1e-12);

struct PinvResult {
  ComplexMatrix pinv;
  double margin = 0.0;  // sigma_min / sigma_max
};

/// Pseudo-inverse plus the singular-value margin from the same decomposition.
PinvResult pinv_with_margin(const ComplexMatrix& a, double rel_tol = 1e-12);

/// Smallest/largest singular value ratio, used for ZF feasibility checks.
double rank_margin(const ComplexMatrix& a);

/// Solve (m + ridge*I) x = rhs for Hermitian PSD m. The ridge is applied only
/// if the plain factorization fails.
ComplexMatrix solve_hermitian_psd(const ComplexMatrix& m, const ComplexMatrix& rhs,
                                  double ridge = 0.0);

template <typename DerivedA, typename DerivedB>
ComplexMatrix kron(const Eigen::MatrixBase<DerivedA>& a,
                   const Eigen::MatrixBase<DerivedB>& b) {
  return Eigen::kroneckerProduct(a.derived(), b.derived());
}

/// Column-major stacking of a matrix into a column vector.
template <typename Derived>
DenseVector<typename Derived::Scalar> vec(const Eigen::MatrixBase<Derived>& a) {
  Dense<typename Derived::Scalar> m = a.derived();
  return Eigen::Map<const DenseVector<typename Derived::Scalar>>(m.data(), m.size());
}

template <typename Derived>
Dense<typename Derived::Scalar> unvec(const Eigen::MatrixBase<Derived>& v, Index rows,
                                      Index cols) {
  if (v.size() != rows * cols)
    throw std::invalid_argument("unvec: size " + std::to_string(v.size()) +
                                " does not match " + std::to_string(rows) + "x" +
                                std::to_string(cols));
  DenseVector<typename Derived::Scalar> tmp = v.derived();
  return Eigen::Map<const Dense<typename Derived::Scalar>>(tmp.data(), rows, cols);
}

/// 0-based position of the (k,k) diagonal entry in the column-major vec of an
/// n x n matrix; k + n*k for 0-based k.
inline Index diag_vec_index(Index k, Index n) { return k + n * k; }

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& a) {
  return a.allFinite();
}

template <typename Derived>
void require_finite(const Eigen::MatrixBase<Derived>& a, const char* name) {
  if (!a.allFinite())
    throw std::invalid_argument(std::string(name) + ": non-finite entries");
}

}  // namespace risfair
