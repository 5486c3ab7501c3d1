#pragma once

#include "risfair/types.hpp"
#include "risfair/zf.hpp"

namespace risfair {

/// Proportional coefficients xi_k, stored normalized so min xi_k = 1.
struct FairnessSpec {
  RealVector xi;

  static FairnessSpec from_ratios(const RealVector& ratios);
  static FairnessSpec equal(Index k);

  Index users() const { return xi.size(); }
  double sum() const { return xi.sum(); }
};

struct PowerOptConfig {
  double bisect_tol = 1e-9;  // bits/s/Hz
  bool lagrangian_enabled = false;
  int max_iters = 500;
  double step0 = 0.8;
  double mu_tol = 1e-12;
  double mu1_init_scale = 1.0;  // deliberate mis-initialization, for testing
};

struct PowerSolution {
  double t = 0.0;            // common rate multiplier, bits/s/Hz per unit xi
  PowerAllocation p;         // watts
  RealVector mu;             // dual variables (empty for the bisection route)
  double consumed_power = 0.0;
  RealVector rates;          // bits/s/Hz, rates_k = t * xi_k exactly
  bool converged = true;     // false when the dual route fell back to bisection
};

/// p_k = sigma2 * (2^(t * xi_k) - 1)
PowerAllocation power_profile(double t, const FairnessSpec& xi, double sigma2);

/// transmit_power(W, power_profile(t)); strictly increasing and continuous in t.
double consumed_power_at(double t, const FairnessSpec& xi, double sigma2,
                         const ComplexMatrix& w);

/// Largest t with consumed power <= P_max: bracket by doubling, then bisect to
/// |dt| <= tol, returning the feasible endpoint. t_floor, when known feasible,
/// seeds the bracket (used by the alternating solver to keep t monotone).
PowerSolution max_t_bisection(const ComplexMatrix& w, const FairnessSpec& xi,
                              double sigma2, double p_max, double tol = 1e-9,
                              double t_floor = 0.0);

/// Dual route: Lemma-2 closed-form powers with subgradient updates of mu
/// (budget complementary slackness for mu_1, rate-ratio feasibility for
/// mu_k, k >= 2). Cross-check only; falls back to the bisection result with
/// converged = false when it does not converge.
PowerSolution lagrangian_power_route(const ComplexMatrix& w, const FairnessSpec& xi,
                                     double sigma2, double p_max,
                                     const PowerOptConfig& cfg = {});

}  // namespace risfair
