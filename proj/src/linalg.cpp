#include "risfair/linalg.hpp"

#include <Eigen/SVD>

namespace risfair {

PinvResult pinv_with_margin(const ComplexMatrix& a, double rel_tol) {
  if (a.size() == 0) throw std::invalid_argument("pinv: empty matrix");
  Eigen::JacobiSVD<ComplexMatrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success)
    throw std::runtime_error("pinv: SVD did not converge for " +
                             std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                             " matrix");
  const auto& s = svd.singularValues();
  const double cutoff = rel_tol * (s.size() > 0 ? s(0) : 0.0);
  RealVector inv_s = RealVector::Zero(s.size());
  for (Index i = 0; i < s.size(); ++i)
    if (s(i) > cutoff) inv_s(i) = 1.0 / s(i);
  PinvResult res;
  res.pinv = svd.matrixV() * inv_s.asDiagonal() * svd.matrixU().adjoint();
  res.margin = (s.size() > 0 && s(0) > 0.0) ? s(s.size() - 1) / s(0) : 0.0;
  return res;
}

ComplexMatrix pinv(const ComplexMatrix& a, double rel_tol) {
  return pinv_with_margin(a, rel_tol).pinv;
}

double rank_margin(const ComplexMatrix& a) {
  Eigen::JacobiSVD<ComplexMatrix> svd(a);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0.0;
  return s(s.size() - 1) / s(0);
}

ComplexMatrix solve_hermitian_psd(const ComplexMatrix& m, const ComplexMatrix& rhs,
                                  double ridge) {
  if (m.rows() != m.cols())
    throw std::invalid_argument("solve_hermitian_psd: matrix not square");
  if ((m - m.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * (1.0 + m.cwiseAbs().maxCoeff()))
    throw std::invalid_argument("solve_hermitian_psd: matrix not Hermitian");

  Eigen::LDLT<ComplexMatrix> ldlt(m);
  if (ldlt.info() == Eigen::Success) {
    ComplexMatrix x = ldlt.solve(rhs);
    if (all_finite(x) && (m * x - rhs).norm() <= 1e-8 * (1.0 + rhs.norm())) return x;
  }
  const double scale = m.cwiseAbs().maxCoeff();
  const double r = ridge > 0.0 ? ridge : 1e-12 * (scale > 0.0 ? scale : 1.0);
  ComplexMatrix reg = m + r * ComplexMatrix::Identity(m.rows(), m.cols());
  Eigen::LDLT<ComplexMatrix> ldlt2(reg);
  ComplexMatrix x = ldlt2.solve(rhs);
  if (ldlt2.info() != Eigen::Success || !all_finite(x)) {
    const double cond = scale > 0.0 ? scale / r : 0.0;
    throw SingularSystemError(
        "solve_hermitian_psd: singular after ridge (condition estimate " +
        std::to_string(cond) + ")");
  }
  return x;
}

}  // namespace risfair
