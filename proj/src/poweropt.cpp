#include "risfair/poweropt.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "risfair/linalg.hpp"

namespace risfair {

namespace {

constexpr double kLn2 = 0.6931471805599453;

RealVector exp2_elems(const RealVector& v) {
  return v.unaryExpr([](double x) { return std::exp2(x); });
}

RealVector column_norms_sq(const ComplexMatrix& w) {
  RealVector wn(w.cols());
  for (Index k = 0; k < w.cols(); ++k) wn(k) = w.col(k).squaredNorm();
  return wn;
}

}  // namespace

FairnessSpec FairnessSpec::from_ratios(const RealVector& ratios) {
  if (ratios.size() == 0)
    throw std::invalid_argument("FairnessSpec: empty ratio vector");
  const double lo = ratios.minCoeff();
  if (!(lo > 0.0))
    throw std::invalid_argument("FairnessSpec: all xi_k must be > 0");
  FairnessSpec spec;
  spec.xi = ratios / lo;  // ratios are what matter; normalize so min = 1
  return spec;
}

FairnessSpec FairnessSpec::equal(Index k) {
  return from_ratios(RealVector::Ones(k));
}

PowerAllocation power_profile(double t, const FairnessSpec& xi, double sigma2) {
  if (t < 0.0) throw std::invalid_argument("power_profile: t must be >= 0");
  PowerAllocation pa;
  pa.p = sigma2 * (exp2_elems(t * xi.xi).array() - 1.0);
  return pa;
}

double consumed_power_at(double t, const FairnessSpec& xi, double sigma2,
                         const ComplexMatrix& w) {
  return transmit_power(w, power_profile(t, xi, sigma2));
}

PowerSolution max_t_bisection(const ComplexMatrix& w, const FairnessSpec& xi,
                              double sigma2, double p_max, double tol,
                              double t_floor) {
  if (p_max <= 0.0) throw std::invalid_argument("max_t_bisection: P_max must be > 0");
  if (xi.users() != w.cols())
    throw std::invalid_argument("max_t_bisection: xi size must match precoder columns");
  const RealVector wn = column_norms_sq(w);
  if (wn.minCoeff() <= 0.0)
    throw RankDeficientError("max_t_bisection: zero-norm precoder column");

  const auto consumed = [&](double t) {
    const double c =
        (sigma2 * (exp2_elems(t * xi.xi).array() - 1.0) * wn.array()).sum();
    return std::isfinite(c) ? c : std::numeric_limits<double>::infinity();
  };

  double lo = (t_floor > 0.0 && consumed(t_floor) <= p_max) ? t_floor : 0.0;
  double hi = std::max(lo, 1.0);
  while (consumed(hi) <= p_max) {
    lo = hi;
    hi *= 2.0;
    if (hi > 0x1p60) break;  // consumed() would have overflowed long before
  }
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (consumed(mid) <= p_max)
      lo = mid;
    else
      hi = mid;
  }

  PowerSolution sol;
  sol.t = lo;
  sol.p = power_profile(lo, xi, sigma2);
  sol.rates = lo * xi.xi;
  sol.consumed_power = transmit_power(w, sol.p);
  sol.mu = RealVector();
  sol.converged = true;
  return sol;
}

PowerSolution lagrangian_power_route(const ComplexMatrix& w, const FairnessSpec& xi,
                                     double sigma2, double p_max,
                                     const PowerOptConfig& cfg) {
  if (p_max <= 0.0)
    throw std::invalid_argument("lagrangian_power_route: P_max must be > 0");
  const Index users = w.cols();
  const PowerSolution fallback = max_t_bisection(w, xi, sigma2, p_max, cfg.bisect_tol);
  const ComplexMatrix b = b_matrix(w);
  RealVector bd(users);
  for (Index k = 0; k < users; ++k) bd(k) = std::real(b_entry(b, k, k));

  const RealVector& x = xi.xi;
  const double xsum = x.sum();

  // For fixed mu_1 the stationarity conditions aggregate to
  //   sum_k xi_k b_kk sigma2 2^(t xi_k) = sum_k xi_k / (ln2 mu_1),
  // whose left side is strictly increasing in t.
  const auto t_of_mu1 = [&](double mu1) {
    const double target = xsum / (kLn2 * mu1);
    const auto h = [&](double t) {
      const double v =
          (x.array() * bd.array() * sigma2 * exp2_elems(t * x).array()).sum();
      return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    };
    if (h(0.0) >= target) return 0.0;
    double lo = 0.0, hi = 1.0;
    while (h(hi) < target) {
      lo = hi;
      hi *= 2.0;
      if (hi > 0x1p60) break;
    }
    for (int i = 0; i < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++i) {
      const double mid = 0.5 * (lo + hi);
      if (h(mid) < target)
        lo = mid;
      else
        hi = mid;
    }
    return 0.5 * (lo + hi);
  };

  // Lemma-2 closed forms evaluated as printed; the sqrt ratio terms carry the
  // off-block b entries, which vanish under ZF.
  const auto closed_form_powers = [&](double mu1, const RealVector& mu, double t) {
    RealVector p(users);
    const RealVector pow2 = exp2_elems(t * x).array() - 1.0;
    const auto ratio = [&](Index j, Index k) {
      if (pow2(k) <= 0.0) return 0.0;
      return std::sqrt(std::max(pow2(j), 0.0) / pow2(k));
    };
    double denom1 = 0.0;
    for (Index j = 0; j < users; ++j)
      denom1 += std::real(b_entry(b, 0, j)) * ratio(j, 0);
    double muxi = 0.0;
    for (Index k = 1; k < users; ++k) muxi += mu(k) * x(k) / x(0);
    p(0) = (1.0 - muxi) / (kLn2 * mu1 * denom1) - sigma2;
    for (Index k = 1; k < users; ++k) {
      double cross = 0.0;
      for (Index j = k + 1; j < users; ++j)
        cross += std::real(b_entry(b, k, j)) * ratio(j, k);
      for (Index j = 0; j < k; ++j)
        cross += std::real(b_entry(b, j, k)) * ratio(j, k);
      p(k) = (1.0 + mu(k)) / (kLn2 * mu1 * (bd(k) + cross)) - sigma2;
    }
    return p;
  };

  double mu1 = cfg.mu1_init_scale * xsum /
               (kLn2 * (x.array() * bd.array() * sigma2 *
                        exp2_elems(fallback.t * x).array())
                           .sum());
  RealVector mu = RealVector::Zero(users);
  double best_t = -1.0;
  RealVector best_mu;
  bool converged = false;

  // consumed power at the mu1-consistent point; fills mu and reports t
  const auto evaluate = [&](double m1, double* t_out) {
    const double t = t_of_mu1(m1);
    // ratio-feasibility roots of the stationarity conditions; these make the
    // closed forms reproduce the proportional profile at t exactly
    for (Index k = 1; k < users; ++k)
      mu(k) = kLn2 * m1 * bd(k) * sigma2 * std::exp2(t * x(k)) - 1.0;
    mu(0) = m1;
    const RealVector p_closed = closed_form_powers(m1, mu, t);
    const double consumed =
        transmit_power(w, PowerAllocation{p_closed.cwiseMax(0.0)});
    if (consumed <= p_max * (1.0 + 1e-9) && p_closed.minCoeff() >= -1e-12 &&
        t > best_t) {
      best_t = t;
      best_mu = mu;
    }
    if (t_out) *t_out = t;
    return consumed;
  };

  // mu1* = min{mu1 >= 0 : consumed <= P_max}; consumed decreases in mu1, so
  // probe multiplicatively for a sign change, then bisect on ln(mu1). The
  // probing steps move mu1 toward complementary slackness by the sign of the
  // budget residual.
  double lo = 0.0, hi = 0.0;  // consumed(lo) > P_max >= consumed(hi)
  {
    int it = 0;
    double m = mu1;
    const double factor = 1.0 + std::max(cfg.step0, 1e-3);
    if (evaluate(m, nullptr) > p_max) {
      lo = m;
      while (it++ < cfg.max_iters) {
        m *= factor;
        if (evaluate(m, nullptr) <= p_max) {
          hi = m;
          break;
        }
        lo = m;
      }
    } else {
      hi = m;
      while (it++ < cfg.max_iters) {
        m /= factor;
        if (evaluate(m, nullptr) > p_max) {
          lo = m;
          break;
        }
        hi = m;
        if (m < 1e-300) break;
      }
    }
    if (lo > 0.0 && hi > 0.0) {
      while (it++ < cfg.max_iters && (hi - lo) / hi > cfg.mu_tol) {
        const double mid = std::sqrt(lo * hi);
        if (evaluate(mid, nullptr) > p_max)
          lo = mid;
        else
          hi = mid;
      }
      converged = (hi - lo) / hi <= cfg.mu_tol;
      evaluate(hi, nullptr);  // leave mu at the feasible endpoint
    }
  }

  if (!converged || best_t < 0.0) {
    PowerSolution sol = fallback;
    sol.converged = false;
    return sol;
  }

  PowerSolution sol;
  sol.t = best_t;
  sol.p = power_profile(best_t, xi, sigma2);
  sol.rates = best_t * x;
  sol.consumed_power = transmit_power(w, sol.p);
  sol.mu = best_mu.cwiseMax(0.0);  // stored duals keep the nonnegative range
  sol.converged = true;
  return sol;
}

}  // namespace risfair
