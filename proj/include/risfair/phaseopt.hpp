#pragma once

#include "risfair/channel.hpp"
#include "risfair/types.hpp"
#include "risfair/zf.hpp"

namespace risfair {

/// Quadratic model of the ZF transmit power as a function of y = vec(Phi^-1):
///   y^H A y + 2 Re{z^H A y} + C0,
/// restricted to the N structurally free diagonal entries (indices
/// l(n) = n + N(n-1) of the vec) for the solve. The full A is kept in factored
/// form F^H F with F = (H2bar^+)^T kron G^+; materializing it is quadratic in
/// N^2 and only needed by verification code.
struct SurrogateQuadratic {
  Index elements = 0;          // N
  ComplexMatrix kron_factor;   // (K*M) x N^2
  ComplexVector z;             // N^2, vec(G H1bar^+ H2bar)
  ComplexMatrix a_red;         // N x N, rows/cols l(n) of the full A
  ComplexVector z_red;         // N, diagonal of G H1bar^+ H2bar
  double c0 = 0.0;             // z^H A z

  ComplexMatrix a_full() const { return kron_factor.adjoint() * kron_factor; }
};

struct PhaseDualState {
  RealVector lambda;      // one nonnegative multiplier per RIS element
  double step_size = 0.1; // base step; effective step is step_size/sqrt(iteration)
  int iteration = 0;
};

struct PhaseOptConfig {
  int max_dual_iters = 200;
  double step0 = 0.1;
  double y_min = 1e-8;
  bool use_literal_lemma1 = false;  // printed closed form instead of stationarity
  int polish_sweeps = 2;            // exact per-element refinement passes (0 = off)
  int polish_coarse = 16;           // coarse angle grid for the polish stage
  double violation_tol = 1e-6;
  double objective_tol = 1e-9;
  // strict-positivity floor applied to the powers only when building the
  // quadratic model; safeguard objectives always use the true powers
  double build_power_floor = 1e-15;
};

struct PhaseOptResult {
  PhaseShift phase;
  bool improved = false;           // false: candidate rejected, ps_prev returned
  double objective = 0.0;          // direct power objective at the returned phase
  double surrogate_deviation = 0.0;  // |surrogate - direct| / direct at the result
  int dual_iterations = 0;
  bool ridged = false;             // inner solve needed ridge regularization
};

/// Builds the quadratic model at the given power allocation. All p_k must be
/// strictly positive (clamp to a power floor first).
SurrogateQuadratic build_surrogate(const ChannelSet& channels,
                                   const PowerAllocation& power,
                                   const PhaseShift& ps_prev);

/// Exact objective: tr((H1^H + H2^H Phi G)^+ P (.)^{+H}) evaluated via the ZF
/// precoder. Throws RankDeficientError for ZF-infeasible Phi.
double direct_power_objective(const ChannelSet& channels, const PhaseShift& ps,
                              const PowerAllocation& power);

/// Reduced quadratic model value at y_n = 1/(sqrt(eta) phi_n).
double surrogate_objective(const SurrogateQuadratic& sq, const PhaseShift& ps);

/// Stationary point of the dual inner problem,
///   y = (A_red + diag(lambda))^-1 A_red z_red.
/// The printed closed form (literal = true) applies the operator in the
/// opposite order and with opposite sign; it is kept for comparison only —
/// its direction provably increases the required power in the scalar regime.
ComplexVector inner_solve(const SurrogateQuadratic& sq, const RealVector& lambda,
                          bool literal = false, bool* ridged = nullptr);

/// phi_n = 1/(sqrt(eta) y_n) with |y_n| clamped below by y_min, then projected
/// onto |phi_n| <= 1 preserving the phase.
PhaseShift phases_from_y(const ComplexVector& y, double eta, double y_min = 1e-8);

/// lambda_n <- max(0, lambda_n + step * (|y_n|^2 - 1)), diminishing step.
PhaseDualState dual_update(const PhaseDualState& state, const ComplexVector& y);

/// Phase subproblem for fixed power. Candidates come from the dual loop and an
/// exact per-element polish; a candidate is accepted only if it strictly
/// decreases direct_power_objective, otherwise ps_prev is returned unchanged.
PhaseOptResult optimize_phase(const ChannelSet& channels, const PowerAllocation& power,
                              const PhaseShift& ps_prev, const PhaseOptConfig& cfg = {});

}  // namespace risfair
