#include "risfair/zf.hpp"

#include <cmath>
#include <stdexcept>

#include "risfair/linalg.hpp"

namespace risfair {

PhaseShift PhaseShift::ones(Index n, double eta) {
  PhaseShift ps;
  ps.eta = eta;
  ps.phi = ComplexVector::Ones(n);
  return ps;
}

ComplexMatrix PhaseShift::Phi() const {
  return std::sqrt(eta) * ComplexMatrix(phi.asDiagonal());
}

void PhaseShift::validate() const {
  if (!(eta > 0.0 && eta <= 1.0))
    throw std::invalid_argument("PhaseShift: eta must lie in (0, 1]");
  for (Index n = 0; n < phi.size(); ++n)
    if (std::abs(phi(n)) > 1.0 + 1e-9)
      throw std::invalid_argument("PhaseShift: |phi_" + std::to_string(n) +
                                  "| exceeds 1");
}

ComplexMatrix effective_channel(const ChannelSet& channels, const PhaseShift& ps) {
  if (ps.phi.size() != channels.ris_elements())
    throw std::invalid_argument("effective_channel: phase vector length mismatch");
  const ComplexVector scaled = std::sqrt(ps.eta) * ps.phi;
  // K x M: H1^H + H2^H Phi G
  return channels.h_direct.adjoint() +
         channels.h_reflect.adjoint() * scaled.asDiagonal() * channels.G;
}

Precoder zf_precoder_for(const ComplexMatrix& effective) {
  PinvResult res = pinv_with_margin(effective);
  if (res.margin < kZfRankTol)
    throw RankDeficientError("zf_precoder: effective channel rank below K (" +
                             std::to_string(effective.rows()) + "x" +
                             std::to_string(effective.cols()) + ")");
  Precoder pre;
  pre.W = std::move(res.pinv);
  return pre;
}

Precoder zf_precoder(const ChannelSet& channels, const PhaseShift& ps) {
  return zf_precoder_for(effective_channel(channels, ps));
}

double sinr(Index k, const ChannelSet& channels, const PhaseShift& ps,
            const ComplexMatrix& w, const PowerAllocation& power, double sigma2) {
  const Index users = channels.users();
  if (k < 0 || k >= users) throw std::invalid_argument("sinr: user index out of range");
  const ComplexMatrix h = effective_channel(channels, ps);
  const ComplexVector gains = (h.row(k) * w).transpose();  // h_k^H w_i for all i
  const double signal = power.p(k) * std::norm(gains(k));
  double interference = 0.0;
  for (Index i = 0; i < users; ++i)
    if (i != k) interference += power.p(i) * std::norm(gains(i));
  return signal / (interference + sigma2);
}

double user_rate(double sinr_value) {
  if (sinr_value < 0.0) throw std::invalid_argument("user_rate: negative SINR");
  return std::log2(1.0 + sinr_value);
}

double transmit_power(const ComplexMatrix& w, const PowerAllocation& power) {
  if (power.p.size() != w.cols())
    throw std::invalid_argument("transmit_power: power size must match precoder columns");
  double total = 0.0;
  for (Index k = 0; k < w.cols(); ++k) total += power.p(k) * w.col(k).squaredNorm();
  return total;
}

ComplexMatrix b_matrix(const ComplexMatrix& w) {
  const Index k = w.cols();
  const ComplexMatrix iw = kron(ComplexMatrix::Identity(k, k), w);
  return iw.adjoint() * iw;
}

Complex b_entry(const ComplexMatrix& b, Index k, Index j) {
  const auto kk = static_cast<Index>(std::llround(std::sqrt(double(b.rows()))));
  return b(diag_vec_index(k, kk), diag_vec_index(j, kk));
}

}  // namespace risfair
