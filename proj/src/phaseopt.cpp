#include "risfair/phaseopt.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "risfair/linalg.hpp"

namespace risfair {

namespace {

constexpr double kAcceptMargin = 1e-12;   // strict-improvement safeguard
constexpr double kPhiMinMagnitude = 1e-12;  // Phi^-1 existence guard

double objective_or_inf(const ChannelSet& channels, const PhaseShift& ps,
                        const PowerAllocation& power) {
  try {
    return direct_power_objective(channels, ps, power);
  } catch (const RankDeficientError&) {
    return std::numeric_limits<double>::infinity();
  }
}

}  // namespace

SurrogateQuadratic build_surrogate(const ChannelSet& channels,
                                   const PowerAllocation& power,
                                   const PhaseShift& ps_prev) {
  const Index n = channels.ris_elements();
  if (ps_prev.phi.size() != n)
    throw std::invalid_argument("build_surrogate: phase vector length mismatch");
  if (power.p.size() != channels.users())
    throw std::invalid_argument("build_surrogate: power size mismatch");
  if (power.p.minCoeff() <= 0.0)
    throw std::invalid_argument(
        "build_surrogate: all powers must be > 0; clamp to p_min first");

  const RealVector q = power.p.cwiseSqrt();
  const ComplexMatrix h1bar = q.asDiagonal() * channels.h_direct.adjoint();  // K x M
  const ComplexMatrix h2bar = q.asDiagonal() * channels.h_reflect.adjoint();  // K x N
  const ComplexMatrix s = channels.G * pinv(h1bar) * h2bar;                   // N x N
  const ComplexMatrix p2 = pinv(h2bar);       // N x K
  const ComplexMatrix pg = pinv(channels.G);  // M x N

  SurrogateQuadratic sq;
  sq.elements = n;
  sq.kron_factor = kron(p2.transpose(), pg);
  sq.z = vec(s);
  sq.z_red = s.diagonal();
  // A restricted to the diagonal vec indices factors into a Hadamard product.
  sq.a_red = (p2.conjugate() * p2.transpose()).cwiseProduct(pg.adjoint() * pg);
  sq.c0 = (sq.kron_factor * sq.z).squaredNorm();
  return sq;
}

double direct_power_objective(const ChannelSet& channels, const PhaseShift& ps,
                              const PowerAllocation& power) {
  const Precoder pre = zf_precoder(channels, ps);
  return transmit_power(pre.W, power);
}

double surrogate_objective(const SurrogateQuadratic& sq, const PhaseShift& ps) {
  if (ps.phi.size() != sq.elements)
    throw std::invalid_argument("surrogate_objective: phase vector length mismatch");
  for (Index i = 0; i < ps.phi.size(); ++i)
    if (std::abs(ps.phi(i)) < kPhiMinMagnitude)
      throw std::invalid_argument("surrogate_objective: |phi_" + std::to_string(i) +
                                  "| below the invertibility clamp");
  const ComplexVector y =
      (std::sqrt(ps.eta) * ps.phi.array()).inverse().matrix();
  const Complex quad = y.dot(sq.a_red * y);  // y^H A_red y
  const Complex lin = sq.z_red.dot(sq.a_red * y);
  return std::real(quad) + 2.0 * std::real(lin) + sq.c0;
}

ComplexVector inner_solve(const SurrogateQuadratic& sq, const RealVector& lambda,
                          bool literal, bool* ridged) {
  if (lambda.size() != sq.elements)
    throw std::invalid_argument("inner_solve: lambda length mismatch");
  if (lambda.minCoeff() < 0.0)
    throw std::invalid_argument("inner_solve: lambda must be nonnegative");
  if (ridged) *ridged = false;

  ComplexMatrix m = sq.a_red;
  m.diagonal() += lambda.cast<Complex>();

  const auto solve = [&](const ComplexVector& rhs) {
    Eigen::LDLT<ComplexMatrix> ldlt(m);
    if (ldlt.info() == Eigen::Success) {
      ComplexVector x = ldlt.solve(rhs);
      if (all_finite(x)) return x;
    }
    if (ridged) *ridged = true;
    const double scale = m.cwiseAbs().maxCoeff();
    ComplexMatrix reg = m;
    reg.diagonal().array() += 1e-12 * (scale > 0.0 ? scale : 1.0);
    ComplexVector x = Eigen::LDLT<ComplexMatrix>(reg).solve(rhs);
    if (!all_finite(x))
      throw SingularSystemError("inner_solve: singular system after ridge");
    return x;
  };

  if (literal) return -(sq.a_red * solve(sq.z_red));
  return solve(sq.a_red * sq.z_red);
}

PhaseShift phases_from_y(const ComplexVector& y, double eta, double y_min) {
  PhaseShift ps;
  ps.eta = eta;
  ps.phi.resize(y.size());
  const double root_eta = std::sqrt(eta);
  for (Index n = 0; n < y.size(); ++n) {
    Complex yn = y(n);
    const double mag = std::abs(yn);
    if (mag < y_min) yn = (mag > 0.0) ? yn * (y_min / mag) : Complex(y_min, 0.0);
    Complex phi = 1.0 / (root_eta * yn);
    const double pm = std::abs(phi);
    if (pm > 1.0) phi /= pm;
    ps.phi(n) = phi;
  }
  return ps;
}

PhaseDualState dual_update(const PhaseDualState& state, const ComplexVector& y) {
  if (y.size() != state.lambda.size())
    throw std::invalid_argument("dual_update: size mismatch");
  PhaseDualState next = state;
  next.iteration = state.iteration + 1;
  const double step = state.step_size / std::sqrt(static_cast<double>(next.iteration));
  for (Index n = 0; n < y.size(); ++n)
    next.lambda(n) = std::max(0.0, state.lambda(n) + step * (std::norm(y(n)) - 1.0));
  return next;
}

namespace {

/// Exact per-element refinement: coarse angle scan followed by golden-section
/// on the best angle, at unit magnitude and at the element's current one.
bool polish(const ChannelSet& channels, const PowerAllocation& power, double eta,
            ComplexVector& phi, double& best_obj, int sweeps, int coarse) {
  const Index n_elems = phi.size();
  const double two_pi = 2.0 * std::numbers::pi;
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  bool any = false;

  const auto eval = [&](Index n, Complex value) {
    ComplexVector trial = phi;
    trial(n) = value;
    return objective_or_inf(channels, PhaseShift{eta, trial}, power);
  };

  for (int sweep = 0; sweep < sweeps; ++sweep) {
    bool improved = false;
    for (Index n = 0; n < n_elems; ++n) {
      double cand_obj = best_obj;
      Complex cand = phi(n);
      const double m0 = std::abs(phi(n));
      for (double mag : {1.0, m0}) {
        if (mag <= 0.0) continue;
        if (mag != 1.0 && std::abs(mag - 1.0) < 1e-12) continue;
        for (int i = 0; i < coarse; ++i) {
          const double th = two_pi * i / coarse;
          const Complex v = mag * Complex(std::cos(th), std::sin(th));
          const double obj = eval(n, v);
          if (obj < cand_obj - 1e-15) {
            cand_obj = obj;
            cand = v;
          }
        }
      }
      // golden-section around the coarse winner
      const double mag = std::abs(cand) > 0.0 ? std::abs(cand) : 1.0;
      const double thc = std::arg(cand);
      double a = thc - std::numbers::pi / coarse;
      double b = thc + std::numbers::pi / coarse;
      const auto f = [&](double th) {
        return eval(n, mag * Complex(std::cos(th), std::sin(th)));
      };
      double c1 = b - gr * (b - a), c2 = a + gr * (b - a);
      double f1 = f(c1), f2 = f(c2);
      for (int i = 0; i < 24; ++i) {
        if (f1 < f2) {
          b = c2;
          c2 = c1;
          f2 = f1;
          c1 = b - gr * (b - a);
          f1 = f(c1);
        } else {
          a = c1;
          c1 = c2;
          f1 = f2;
          c2 = a + gr * (b - a);
          f2 = f(c2);
        }
      }
      const double thb = 0.5 * (a + b);
      const double fb = f(thb);
      if (fb < cand_obj - 1e-15) {
        cand_obj = fb;
        cand = mag * Complex(std::cos(thb), std::sin(thb));
      }
      if (cand_obj < best_obj - kAcceptMargin) {
        phi(n) = cand;
        best_obj = cand_obj;
        improved = true;
        any = true;
      }
    }
    if (!improved) break;
  }
  return any;
}

}  // namespace

PhaseOptResult optimize_phase(const ChannelSet& channels, const PowerAllocation& power,
                              const PhaseShift& ps_prev, const PhaseOptConfig& cfg) {
  ps_prev.validate();
  const Index n = channels.ris_elements();
  const double base_obj = direct_power_objective(channels, ps_prev, power);

  PhaseOptResult res;
  res.phase = ps_prev;
  res.objective = base_obj;

  const PowerAllocation build_power{power.p.cwiseMax(cfg.build_power_floor)};
  const SurrogateQuadratic sq = build_surrogate(channels, build_power, ps_prev);

  ComplexVector best_phi = ps_prev.phi;
  double best_obj = base_obj;

  PhaseDualState state{RealVector::Zero(n), cfg.step0, 0};
  double prev_cand_obj = std::numeric_limits<double>::infinity();
  for (int it = 1; it <= cfg.max_dual_iters; ++it) {
    res.dual_iterations = it;
    ComplexVector y;
    try {
      bool ridged = false;
      y = inner_solve(sq, state.lambda, cfg.use_literal_lemma1, &ridged);
      res.ridged = res.ridged || ridged;
    } catch (const SingularSystemError&) {
      break;
    }
    const PhaseShift cand = phases_from_y(y, ps_prev.eta, cfg.y_min);
    const double obj = objective_or_inf(channels, cand, power);
    if (obj < best_obj - kAcceptMargin) {
      best_obj = obj;
      best_phi = cand.phi;
      res.improved = true;
    }
    state = dual_update(state, y);

    double viol = 0.0;
    for (Index i = 0; i < n; ++i) viol = std::max(viol, std::norm(y(i)) - 1.0);
    const bool obj_settled =
        std::isfinite(obj) && std::abs(obj - prev_cand_obj) < cfg.objective_tol;
    prev_cand_obj = obj;
    if (viol < cfg.violation_tol || obj_settled) break;
  }

  if (cfg.polish_sweeps > 0) {
    std::vector<ComplexVector> starts{best_phi};
    if ((best_phi - ps_prev.phi).norm() > 0.0) starts.push_back(ps_prev.phi);
    if (n <= 3) {
      // small arrays: coarse joint scan over unit-modulus patterns so the
      // polish starts in the right basin
      const int steps = 12;
      ComplexVector grid_best = best_phi;
      double grid_obj = best_obj;
      ComplexVector cand(n);
      std::vector<int> idx(static_cast<std::size_t>(n), 0);
      for (;;) {
        for (Index i = 0; i < n; ++i) {
          const double th = 2.0 * std::numbers::pi * idx[static_cast<std::size_t>(i)] / steps;
          cand(i) = Complex(std::cos(th), std::sin(th));
        }
        const double obj =
            objective_or_inf(channels, PhaseShift{ps_prev.eta, cand}, power);
        if (obj < grid_obj - kAcceptMargin) {
          grid_obj = obj;
          grid_best = cand;
        }
        Index carry = 0;
        while (carry < n && ++idx[static_cast<std::size_t>(carry)] == steps) {
          idx[static_cast<std::size_t>(carry)] = 0;
          ++carry;
        }
        if (carry == n) break;
      }
      if (grid_obj < best_obj - kAcceptMargin) starts.push_back(grid_best);
    }
    for (const ComplexVector& start : starts) {
      ComplexVector phi = start;
      double obj = objective_or_inf(channels, PhaseShift{ps_prev.eta, phi}, power);
      if (!std::isfinite(obj)) continue;
      polish(channels, power, ps_prev.eta, phi, obj, cfg.polish_sweeps,
             cfg.polish_coarse);
      if (obj < best_obj - kAcceptMargin) {
        best_obj = obj;
        best_phi = phi;
        res.improved = true;
      }
    }
  }

  if (res.improved && best_obj < base_obj - kAcceptMargin) {
    res.phase = PhaseShift{ps_prev.eta, best_phi};
    res.objective = best_obj;
  } else {
    res.improved = false;  // safeguard: keep ps_prev
  }

  try {
    // model fidelity at the powers the model was built for
    const double surr = surrogate_objective(sq, res.phase);
    const double direct_at_build =
        direct_power_objective(channels, res.phase, build_power);
    res.surrogate_deviation =
        std::abs(surr - direct_at_build) / std::max(direct_at_build, 1e-300);
  } catch (const std::exception&) {
    res.surrogate_deviation = std::numeric_limits<double>::quiet_NaN();
  }
  return res;
}

}  // namespace risfair
