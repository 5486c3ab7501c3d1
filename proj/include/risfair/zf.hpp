#pragma once

#include "risfair/channel.hpp"
#include "risfair/types.hpp"

namespace risfair {

/// RIS reflection state: Phi = sqrt(eta) * diag(phi), |phi_n| <= 1.
struct PhaseShift {
  double eta = 1.0;
  ComplexVector phi;

  static PhaseShift ones(Index n, double eta);

  ComplexMatrix Phi() const;  // sqrt(eta) * diag(phi)
  void validate() const;      // eta in (0,1], |phi_n| <= 1 + 1e-9
};

struct Precoder {
  ComplexMatrix W;  // M x K, columns w_k
};

struct PowerAllocation {
  RealVector p;  // watts, one entry per user
};

/// Row k equals h_k^H = h_{d,k}^H + h_{r,k}^H Phi G.  Returns K x M.
ComplexMatrix effective_channel(const ChannelSet& channels, const PhaseShift& ps);

/// Relative rank threshold below which a ZF realization counts as an outage.
inline constexpr double kZfRankTol = 1e-10;

/// W = pinv(effective channel); throws RankDeficientError when the effective
/// channel does not have row rank K.
Precoder zf_precoder(const ChannelSet& channels, const PhaseShift& ps);

/// Same as zf_precoder but for an already-assembled K x M channel (used by the
/// non-RIS baseline).
Precoder zf_precoder_for(const ComplexMatrix& effective);

/// General SINR quotient for user k (0-based):
///   p_k |h_k^H w_k|^2 / (sum_{i != k} p_i |h_k^H w_i|^2 + sigma2).
double sinr(Index k, const ChannelSet& channels, const PhaseShift& ps,
            const ComplexMatrix& w, const PowerAllocation& power, double sigma2);

/// Shannon rate log2(1 + sinr), bits/s/Hz.
double user_rate(double sinr_value);

/// tr(P W^H W) = sum_k p_k ||w_k||^2, watts.
double transmit_power(const ComplexMatrix& w, const PowerAllocation& power);

/// B = (I kron W)^H (I kron W), K^2 x K^2.
ComplexMatrix b_matrix(const ComplexMatrix& w);

/// Entry b_{l(k), l(j)} of B with l(k) = k + K(k-1) (k, j 0-based here).
Complex b_entry(const ComplexMatrix& b, Index k, Index j);

}  // namespace risfair
