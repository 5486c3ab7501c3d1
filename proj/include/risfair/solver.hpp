#pragma once

#include <cstdint>
#include <vector>

#include "risfair/channel.hpp"
#include "risfair/phaseopt.hpp"
#include "risfair/poweropt.hpp"

namespace risfair {

struct SolverConfig {
  int max_outer = 50;
  double outer_tol = 1e-6;     // relative change in t
  int restarts = 1;            // multi-start count; 1 = deterministic phi = 1 start
  std::uint64_t restart_seed = 12345;
  double p_min_clamp = 1e-15;  // strict-positivity floor for surrogate builds
  PhaseOptConfig phase;
  PowerOptConfig power;
};

struct IterationTrace {
  double t = 0.0;
  double consumed_power = 0.0;
  double surrogate_deviation = 0.0;
};

struct SolveResult {
  PhaseShift phase;
  PowerSolution power;
  double sum_se = 0.0;  // t * sum(xi), bits/s/Hz
  RealVector per_user_rates;
  int outer_iters = 0;
  std::vector<IterationTrace> trace;
  double surrogate_deviation = 0.0;
  bool outage = false;
  // relative |t_bisection - t_dual| when power.lagrangian_enabled; -1 when the
  // dual route did not converge
  double dual_route_gap = 0.0;
};

/// Algorithm: start from phi = 1 and t from bisection, then alternate the
/// safeguarded phase step with the power bisection until the relative change
/// in t drops below outer_tol. The safeguard keeps the t trace non-decreasing.
SolveResult solve(const ChannelSet& channels, const FairnessSpec& xi, double p_max,
                  double eta, double sigma2, const SolverConfig& cfg = {});

/// Random phases phi_n = exp(i theta_n), power by bisection, no alternation.
SolveResult baseline_random_phase(const ChannelSet& channels, const FairnessSpec& xi,
                                  double p_max, double eta, double sigma2,
                                  std::uint64_t seed, const SolverConfig& cfg = {});

/// W = pinv(H1^H): conventional ZF without the RIS, power by bisection.
SolveResult baseline_non_ris(const ChannelSet& channels, const FairnessSpec& xi,
                             double p_max, double sigma2,
                             const SolverConfig& cfg = {});

}  // namespace risfair
