#include "risfair/solver.hpp"

#include <cmath>

#include "risfair/linalg.hpp"

namespace risfair {

namespace {

double dual_route_gap(const ComplexMatrix& w, const FairnessSpec& xi,
                      double sigma2, double p_max, const PowerSolution& bisected,
                      const PowerOptConfig& cfg) {
  if (!cfg.lagrangian_enabled) return 0.0;
  const PowerSolution dual = lagrangian_power_route(w, xi, sigma2, p_max, cfg);
  if (!dual.converged) return -1.0;
  return std::abs(dual.t - bisected.t) / std::max(bisected.t, 1e-300);
}

SolveResult outage_result(Index n, Index k, double eta) {
  SolveResult res;
  res.phase = PhaseShift::ones(n, eta);
  res.per_user_rates = RealVector::Zero(k);
  res.outage = true;
  return res;
}

SolveResult power_only_result(const ComplexMatrix& w, const PhaseShift& ps,
                              const FairnessSpec& xi, double sigma2, double p_max,
                              const SolverConfig& cfg) {
  SolveResult res;
  res.phase = ps;
  res.power = max_t_bisection(w, xi, sigma2, p_max, cfg.power.bisect_tol);
  res.sum_se = res.power.t * xi.sum();
  res.per_user_rates = res.power.rates;
  res.outer_iters = 0;
  res.trace.push_back({res.power.t, res.power.consumed_power, 0.0});
  res.dual_route_gap = dual_route_gap(w, xi, sigma2, p_max, res.power, cfg.power);
  return res;
}

SolveResult solve_from(const ChannelSet& channels, const FairnessSpec& xi,
                       double p_max, double eta, double sigma2,
                       const PhaseShift& start, const SolverConfig& cfg) {
  PhaseShift ps = start;
  Precoder pre;
  try {
    pre = zf_precoder(channels, ps);
  } catch (const RankDeficientError&) {
    return outage_result(channels.ris_elements(), channels.users(), eta);
  }

  PowerSolution power = max_t_bisection(pre.W, xi, sigma2, p_max, cfg.power.bisect_tol);
  std::vector<IterationTrace> trace;
  trace.push_back({power.t, power.consumed_power, 0.0});

  PhaseOptConfig phase_cfg = cfg.phase;
  phase_cfg.build_power_floor = cfg.p_min_clamp;

  double deviation = 0.0;
  int outer = 0;
  while (outer < cfg.max_outer) {
    ++outer;
    // true powers drive the safeguard; the floor applies inside the model build
    const PhaseOptResult phase_step = optimize_phase(channels, power.p, ps, phase_cfg);
    deviation = phase_step.surrogate_deviation;
    ps = phase_step.phase;

    pre = zf_precoder(channels, ps);  // safeguard never accepts an infeasible phase
    const double t_prev = power.t;
    power = max_t_bisection(pre.W, xi, sigma2, p_max, cfg.power.bisect_tol,
                            /*t_floor=*/t_prev);
    trace.push_back({power.t, power.consumed_power, deviation});

    const double rel_change = (power.t - t_prev) / std::max(t_prev, 1e-300);
    if (!phase_step.improved || rel_change < cfg.outer_tol) break;
  }

  SolveResult res;
  res.phase = ps;
  res.power = power;
  res.sum_se = power.t * xi.sum();
  res.per_user_rates = power.rates;
  res.outer_iters = outer;
  res.trace = std::move(trace);
  res.surrogate_deviation = deviation;
  res.dual_route_gap =
      dual_route_gap(pre.W, xi, sigma2, p_max, res.power, cfg.power);
  return res;
}

}  // namespace

SolveResult solve(const ChannelSet& channels, const FairnessSpec& xi, double p_max,
                  double eta, double sigma2, const SolverConfig& cfg) {
  SolveResult best =
      solve_from(channels, xi, p_max, eta, sigma2,
                 PhaseShift::ones(channels.ris_elements(), eta), cfg);
  for (int r = 1; r < cfg.restarts; ++r) {
    Rng rng(cfg.restart_seed, static_cast<std::uint64_t>(r));
    PhaseShift ps;
    ps.eta = eta;
    ps.phi.resize(channels.ris_elements());
    for (Index n = 0; n < ps.phi.size(); ++n) {
      const double th = rng.angle();
      ps.phi(n) = Complex(std::cos(th), std::sin(th));
    }
    SolveResult alt = solve_from(channels, xi, p_max, eta, sigma2, ps, cfg);
    if (!alt.outage && (best.outage || alt.sum_se > best.sum_se)) best = std::move(alt);
  }
  return best;
}

SolveResult baseline_random_phase(const ChannelSet& channels, const FairnessSpec& xi,
                                  double p_max, double eta, double sigma2,
                                  std::uint64_t seed, const SolverConfig& cfg) {
  Rng rng(seed, /*stream=*/3);
  PhaseShift ps;
  ps.eta = eta;
  ps.phi.resize(channels.ris_elements());
  for (Index n = 0; n < ps.phi.size(); ++n) {
    const double th = rng.angle();
    ps.phi(n) = Complex(std::cos(th), std::sin(th));
  }
  try {
    const Precoder pre = zf_precoder(channels, ps);
    return power_only_result(pre.W, ps, xi, sigma2, p_max, cfg);
  } catch (const RankDeficientError&) {
    return outage_result(channels.ris_elements(), channels.users(), eta);
  }
}

SolveResult baseline_non_ris(const ChannelSet& channels, const FairnessSpec& xi,
                             double p_max, double sigma2, const SolverConfig& cfg) {
  try {
    const Precoder pre = zf_precoder_for(channels.h_direct.adjoint());
    return power_only_result(pre.W,
                             PhaseShift::ones(channels.ris_elements(), /*eta=*/1.0),
                             xi, sigma2, p_max, cfg);
  } catch (const RankDeficientError&) {
    return outage_result(channels.ris_elements(), channels.users(), 1.0);
  }
}

}  // namespace risfair
