// Acceptance suite: one line per criterion, nonzero exit on any failure.
//
// Criterion 2 deliberately includes an assertion that is known not to hold:
// the reduced quadratic phase-shift model is a heuristic and does not
// reproduce the exact ZF transmit power, not even in the all-square
// invertible regime. The check is kept strict instead of being weakened; the
// measured deviation is printed next to it, and the optimizer's safeguard
// (every phase step is validated against the exact objective) is what the
// remaining criteria rely on.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "risfair/harness.hpp"
#include "risfair/linalg.hpp"

using namespace risfair;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
  std::printf("[%s] criterion %2d: %s\n", pass ? "PASS" : "FAIL", criterion,
              detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

void note(const std::string& line) {
  std::printf("        %s\n", line.c_str());
  std::fflush(stdout);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

ComplexMatrix random_matrix(Rng& rng, Index rows, Index cols) {
  ComplexMatrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = rng.complex_gaussian();
  return m;
}

ChannelSet random_channels(Rng& rng, Index m, Index n, Index k) {
  ChannelSet ch;
  ch.G = random_matrix(rng, n, m);
  ch.h_direct = random_matrix(rng, m, k);
  ch.h_reflect = random_matrix(rng, n, k);
  return ch;
}

ComplexVector random_unit_phases(Rng& rng, Index n) {
  ComplexVector v(n);
  for (Index i = 0; i < n; ++i) {
    const double th = rng.angle();
    v(i) = Complex(std::cos(th), std::sin(th));
  }
  return v;
}

// ---------------------------------------------------------------- criterion 1

void criterion_1_penrose() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(101);
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    const Index r = 1 + static_cast<Index>(rng.uniform() * 6);
    const Index c = 1 + static_cast<Index>(rng.uniform() * 6);
    ComplexMatrix a;
    if (i % 3 == 0 && std::min(r, c) > 1) {
      const Index rank = std::min(r, c) - 1;
      a = random_matrix(rng, r, rank) * random_matrix(rng, rank, c);
    } else {
      a = random_matrix(rng, r, c);
    }
    const ComplexMatrix ap = pinv(a);
    const double s = std::max(1.0, a.norm());
    const double sp = std::max(1.0, ap.norm());
    worst = std::max(worst, (a * ap * a - a).norm() / s);
    worst = std::max(worst, (ap * a * ap - ap).norm() / sp);
    worst = std::max(worst, ((a * ap) - (a * ap).adjoint()).norm() / s);
    worst = std::max(worst, ((ap * a) - (ap * a).adjoint()).norm() / s);
  }
  const double dt = seconds_since(t0);
  std::ostringstream os;
  os << "Penrose conditions on 200 random matrices: max residual " << worst
     << " (<= 1e-9), " << dt << " s (< 5 s)";
  report(1, worst <= 1e-9 && dt < 5.0, os.str());
}

// ---------------------------------------------------------------- criterion 2

double norm_form(const ChannelSet& ch, const PowerAllocation& power,
                 const PhaseShift& ps) {
  const RealVector q = power.p.cwiseSqrt();
  const ComplexMatrix h1bar = q.asDiagonal() * ch.h_direct.adjoint();
  const ComplexMatrix h2bar = q.asDiagonal() * ch.h_reflect.adjoint();
  const ComplexMatrix s = ch.G * pinv(h1bar) * h2bar;
  ComplexMatrix phi_inv = ComplexMatrix::Zero(ps.phi.size(), ps.phi.size());
  for (Index n = 0; n < ps.phi.size(); ++n)
    phi_inv(n, n) = 1.0 / (std::sqrt(ps.eta) * ps.phi(n));
  return (pinv(ch.G) * (s + phi_inv) * pinv(h2bar)).squaredNorm();
}

double full_quadratic(const SurrogateQuadratic& sq, const PhaseShift& ps) {
  const Index n = sq.elements;
  ComplexVector y_full = ComplexVector::Zero(n * n);
  for (Index i = 0; i < n; ++i)
    y_full(diag_vec_index(i, n)) = 1.0 / (std::sqrt(ps.eta) * ps.phi(i));
  const ComplexMatrix a = sq.a_full();
  const Complex quad = y_full.dot(a * y_full);
  const Complex lin = sq.z.dot(a * y_full);
  return std::real(quad) + 2.0 * std::real(lin) + sq.c0;
}

void criterion_2_identity_suite() {
  Rng rng(202);

  // (a) the vec/Kronecker reduction chain, exact for any matrices
  double worst_chain = 0.0;
  for (int i = 0; i < 100; ++i) {
    const Index m = 2 + static_cast<Index>(rng.uniform() * 3);
    const Index k = 2 + static_cast<Index>(rng.uniform() * 2);
    const Index n = 2 + static_cast<Index>(rng.uniform() * 3);
    const ChannelSet ch = random_channels(rng, m, n, k);
    RealVector p(k);
    for (Index j = 0; j < k; ++j) p(j) = 0.5 + rng.uniform();
    const PowerAllocation power{p};
    const PhaseShift ps{0.8, random_unit_phases(rng, n)};

    // norm <-> vec step
    const ComplexMatrix x = random_matrix(rng, n, k);
    worst_chain = std::max(
        worst_chain, std::abs(x.squaredNorm() - vec(x).squaredNorm()) /
                         std::max(1.0, x.squaredNorm()));
    // vec(AXB) = (B^T kron A) vec(X)
    const ComplexMatrix a = random_matrix(rng, m, n), b = random_matrix(rng, k, m);
    const ComplexVector lhs = vec(ComplexMatrix(a * x * b));
    const ComplexVector rhs = kron(b.transpose(), a) * vec(x);
    worst_chain =
        std::max(worst_chain, (lhs - rhs).norm() / std::max(1.0, lhs.norm()));
    // quadratic expansion of the rewritten objective
    const SurrogateQuadratic sq = build_surrogate(ch, power, ps);
    const double nf = norm_form(ch, power, ps);
    worst_chain = std::max(worst_chain, std::abs(full_quadratic(sq, ps) - nf) /
                                            std::max(1.0, std::abs(nf)));
  }
  const bool pass_chain = worst_chain <= 1e-9;
  note("2a vec/Kronecker chain on 100 random instances: max rel error " +
       std::to_string(worst_chain) + " (<= 1e-9): " + (pass_chain ? "ok" : "FAIL"));

  // (b) reduced quadratic model vs the exact ZF power objective in the
  // all-square invertible regime
  double worst_sq = 0.0;
  for (int i = 0; i < 60; ++i) {
    const Index n = 1 + static_cast<Index>(rng.uniform() * 3);  // N = M = K
    const ChannelSet ch = random_channels(rng, n, n, n);
    RealVector p(n);
    for (Index j = 0; j < n; ++j) p(j) = 0.5 + rng.uniform();
    const PowerAllocation power{p};
    const PhaseShift ps{1.0, random_unit_phases(rng, n)};
    const SurrogateQuadratic sq = build_surrogate(ch, power, ps);
    const double direct = direct_power_objective(ch, ps, power);
    const double surr = surrogate_objective(sq, ps);
    worst_sq = std::max(worst_sq, std::abs(surr - direct) / direct);
  }
  const bool pass_sq = worst_sq <= 1e-9;
  note("2b model-vs-exact objective, all-square invertible regime: max rel "
       "deviation " +
       std::to_string(worst_sq) + " (<= 1e-9): " + (pass_sq ? "ok" : "FAIL"));
  if (!pass_sq)
    note("    the reduced quadratic model is heuristic: its derivation inverts "
         "a sum termwise, which fails even for 1x1 invertible matrices; the "
         "optimizer therefore validates every step against the exact objective");

  // (c) general pseudo-inverse regime: deviation is measured, not asserted
  double worst_gen = 0.0, sum_gen = 0.0;
  int count_gen = 0;
  for (int i = 0; i < 60; ++i) {
    const ChannelSet ch = random_channels(rng, 4, 6, 3);
    RealVector p(3);
    for (Index j = 0; j < 3; ++j) p(j) = 0.5 + rng.uniform();
    const PowerAllocation power{p};
    const PhaseShift ps{0.8, random_unit_phases(rng, 6)};
    const SurrogateQuadratic sq = build_surrogate(ch, power, ps);
    const double direct = direct_power_objective(ch, ps, power);
    const double dev = std::abs(surrogate_objective(sq, ps) - direct) / direct;
    worst_gen = std::max(worst_gen, dev);
    sum_gen += dev;
    ++count_gen;
  }
  note("2c general regime deviation (logged, not asserted): mean " +
       std::to_string(sum_gen / count_gen) + ", max " + std::to_string(worst_gen));

  report(2, pass_chain && pass_sq,
         "rewrite-identity suite (see sub-checks above)");
}

// ---------------------------------------------------------------- criterion 3

void criterion_3_power_exactness() {
  Rng rng(303);
  bool ok = true;
  double worst_budget_lo = 1.0, worst_prop = 0.0, worst_grid = 0.0;
  for (int i = 0; i < 100; ++i) {
    const Index k = 2 + static_cast<Index>(rng.uniform() * 3);
    const Index m = k + static_cast<Index>(rng.uniform() * 3);
    const Index n = 2 + static_cast<Index>(rng.uniform() * 6);
    const ChannelSet ch = random_channels(rng, m, n, k);
    const PhaseShift ps{0.8, random_unit_phases(rng, n)};
    Precoder pre;
    try {
      pre = zf_precoder(ch, ps);
    } catch (const RankDeficientError&) {
      continue;
    }
    RealVector ratios(k);
    for (Index j = 0; j < k; ++j) ratios(j) = 0.5 + 2.0 * rng.uniform();
    const FairnessSpec xi = FairnessSpec::from_ratios(ratios);
    const double sigma2 = 0.005 + 0.1 * rng.uniform();
    const double p_max = 0.5 + 4.0 * rng.uniform();

    const PowerSolution sol = max_t_bisection(pre.W, xi, sigma2, p_max);
    ok = ok && sol.consumed_power <= p_max * (1.0 + 1e-9);
    worst_budget_lo = std::min(worst_budget_lo, sol.consumed_power / p_max);
    for (Index j = 0; j < k; ++j)
      worst_prop = std::max(worst_prop, std::abs(sol.rates(j) / xi.xi(j) - sol.t) /
                                            std::max(sol.t, 1e-30));

    if (k == 2) {
      double t_grid = 0.0;
      for (double t = std::max(0.0, sol.t - 2e-5); t <= sol.t + 2e-5; t += 1e-6)
        if (consumed_power_at(t, xi, sigma2, pre.W) <= p_max) t_grid = t;
      worst_grid = std::max(worst_grid, std::abs(sol.t - t_grid));
    }
  }
  ok = ok && worst_budget_lo >= 1.0 - 1e-6 && worst_prop <= 1e-9 &&
       worst_grid <= 1e-5;
  std::ostringstream os;
  os << "power subproblem: budget in [1-1e-6, 1+1e-9]*P_max (lowest "
     << worst_budget_lo << "), proportionality spread " << worst_prop
     << " (<= 1e-9), K=2 grid gap " << worst_grid << " (<= 1e-5)";
  report(3, ok, os.str());
}

// ------------------------------------------------- shared channel generation

ChannelSet figure_channels(std::uint64_t seed, int m, int n, int k, double d) {
  Geometry geom;
  geom.ris_position = {d, 50.0};
  geom.user_positions = place_users(seed, k, {200.0, 0.0}, 10.0);
  return sample_channels(seed, geom, PathLossParams{}, m, n, k);
}

// ---------------------------------------------------------------- criterion 4

void criterion_4_monotone() {
  const double sigma2 = noise_power(180e3, -174.0);
  const double p_max = dbm_to_watts(0.0);
  const FairnessSpec xi = FairnessSpec::equal(4);
  int violations = 0, outages = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const ChannelSet ch = figure_channels(40000 + trial, 4, 10, 4, 100.0);
    const SolveResult res = solve(ch, xi, p_max, 0.8, sigma2);
    if (res.outage) {
      ++outages;
      continue;
    }
    for (std::size_t i = 1; i < res.trace.size(); ++i)
      if (res.trace[i].t < res.trace[i - 1].t - 1e-12) ++violations;
  }
  std::ostringstream os;
  os << "monotone alternation over 500 seeded trials: " << violations
     << " trace violations (require 0), " << outages << " outages";
  report(4, violations == 0, os.str());
}

// ------------------------------------------------------------ criteria 5 & 8

struct CellStats {
  double mean_proposed = 0.0, mean_random = 0.0, mean_non_ris = 0.0;
};

ExperimentSpec figure_spec(const RealVector& xi) {
  ExperimentSpec spec;
  spec.sweep = SweepVariable::pmax_dbm;
  spec.sweep_values = {-10.0, 0.0, 10.0};
  spec.trials = 250;
  spec.base_seed = 50000;
  spec.xi_ratios = xi;
  return spec;
}

void criteria_5_and_8() {
  const auto t0 = std::chrono::steady_clock::now();
  bool pass5 = true;
  std::vector<std::vector<TrialRecord>> record_sets;

  for (int which = 0; which < 2; ++which) {
    const RealVector xi =
        which == 0 ? RealVector::Ones(4)
                   : (RealVector(4) << 1.0, 2.0, 3.0, 4.0).finished();
    const ExperimentSpec spec = figure_spec(xi);
    const auto records = run_experiment(spec);
    const auto rows = summarize(records);
    record_sets.push_back(records);

    std::vector<double> prev{-1.0, -1.0, -1.0};  // per-method running mean
    for (double v : spec.sweep_values) {
      CellStats cell;
      for (const auto& r : rows) {
        if (r.sweep_value != v || r.empty) continue;
        if (r.method == "proposed") cell.mean_proposed = r.mean_se;
        if (r.method == "random_phase") cell.mean_random = r.mean_se;
        if (r.method == "non_ris") cell.mean_non_ris = r.mean_se;
      }
      const bool order =
          cell.mean_proposed > cell.mean_random && cell.mean_random > cell.mean_non_ris;
      const bool rising = cell.mean_proposed > prev[0] && cell.mean_random > prev[1] &&
                          cell.mean_non_ris > prev[2];
      pass5 = pass5 && order && rising;
      prev = {cell.mean_proposed, cell.mean_random, cell.mean_non_ris};
      std::ostringstream os;
      os.precision(4);
      os << "   xi=" << (which == 0 ? "1:1:1:1" : "1:2:3:4") << " Pmax=" << v
         << " dBm: proposed " << cell.mean_proposed << ", random " << cell.mean_random
         << ", non-RIS " << cell.mean_non_ris << (order ? "" : "  ORDER VIOLATED");
      note(os.str());
    }
  }
  const double dt = seconds_since(t0);
  std::ostringstream os5;
  os5 << "average-SE-vs-Pmax trend with 250 paired trials/point, both ratio sets, "
      << dt << " s (< 600 s)";
  report(5, pass5 && dt < 600.0, os5.str());

  // criterion 8 from the xi = 1:1:1:1 records: equal rates within each trial,
  // and paired min-rate dominance of proposed over random phase
  const auto& recs = record_sets[0];
  double worst_eq = 0.0;
  int wins = 0, pairs = 0;
  for (std::size_t i = 0; i < recs.size(); ++i) {
    const TrialRecord& r = recs[i];
    if (r.outage) continue;
    if (r.method == "proposed" || r.method == "random_phase") {
      for (Index u = 0; u < r.per_user_rates.size(); ++u)
        worst_eq = std::max(worst_eq,
                            std::abs(r.per_user_rates(u) - r.per_user_rates(0)) /
                                std::max(r.per_user_rates(0), 1e-30));
    }
  }
  // records arrive grouped (proposed, random_phase, non_ris) per trial
  for (std::size_t g = 0; g + 2 < recs.size(); g += 3) {
    if (recs[g].outage || recs[g + 1].outage) continue;
    const double min_prop = recs[g].per_user_rates.minCoeff();
    const double min_rand = recs[g + 1].per_user_rates.minCoeff();
    ++pairs;
    wins += min_prop >= min_rand - 1e-12;
  }
  const double win_rate = pairs > 0 ? double(wins) / pairs : 0.0;
  std::ostringstream os8;
  os8 << "equal-ratio case: per-user rate spread " << worst_eq
      << " (<= 1e-9), min-rate wins " << wins << "/" << pairs << " = " << win_rate
      << " (>= 0.95)";
  report(8, worst_eq <= 1e-9 && win_rate >= 0.95, os8.str());
}

// ---------------------------------------------------------------- criterion 6

void criterion_6_n_sweep() {
  ExperimentSpec spec;
  spec.sweep = SweepVariable::n_elements;
  spec.sweep_values = {10.0, 20.0, 40.0};
  spec.trials = 100;
  spec.base_seed = 60000;
  spec.xi_ratios = RealVector::Ones(4);
  spec.methods = {"proposed", "random_phase"};
  const auto rows = summarize(run_experiment(spec));

  double prop[3] = {0, 0, 0}, rnd[3] = {0, 0, 0};
  for (const auto& r : rows) {
    int i = r.sweep_value == 10.0 ? 0 : (r.sweep_value == 20.0 ? 1 : 2);
    if (r.method == "proposed") prop[i] = r.mean_se;
    if (r.method == "random_phase") rnd[i] = r.mean_se;
  }
  const bool increasing = prop[0] < prop[1] && prop[1] < prop[2];
  const bool widening =
      (prop[1] - rnd[1]) > (prop[0] - rnd[0]) && (prop[2] - rnd[2]) > (prop[1] - rnd[1]);
  std::ostringstream os;
  os.precision(4);
  os << "SE vs N at 0 dBm: proposed " << prop[0] << "/" << prop[1] << "/" << prop[2]
     << " rising, gap to random " << prop[0] - rnd[0] << "/" << prop[1] - rnd[1] << "/"
     << prop[2] - rnd[2] << " widening";
  report(6, increasing && widening, os.str());
}

// ---------------------------------------------------------------- criterion 7

void criterion_7_d_sweep() {
  ExperimentSpec spec;
  spec.sweep = SweepVariable::ris_distance_m;
  spec.sweep_values = {20.0, 100.0, 180.0};
  spec.trials = 100;
  spec.base_seed = 70000;
  spec.xi_ratios = RealVector::Ones(4);
  spec.methods = {"proposed"};
  const auto rows = summarize(run_experiment(spec));

  double se[3] = {0, 0, 0};
  for (const auto& r : rows) {
    int i = r.sweep_value == 20.0 ? 0 : (r.sweep_value == 100.0 ? 1 : 2);
    if (r.method == "proposed") se[i] = r.mean_se;
  }
  std::ostringstream os;
  os.precision(4);
  os << "SE vs RIS position D: " << se[0] << " (D=20) vs " << se[1] << " (D=100) vs "
     << se[2] << " (D=180); center placement is the worst";
  report(7, se[1] < se[0] && se[1] < se[2], os.str());
}

// ---------------------------------------------------------------- criterion 9

void criterion_9_joint_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(909);
  double worst_ratio = 1.0;
  for (int trial = 0; trial < 20; ++trial) {
    const ChannelSet ch = random_channels(rng, 2, 2, 2);
    const FairnessSpec xi =
        trial % 2 == 0 ? FairnessSpec::equal(2)
                       : FairnessSpec::from_ratios((RealVector(2) << 1, 2).finished());
    const double sigma2 = 1e-4, p_max = 1.0, eta = 0.8;
    const SolveResult res = solve(ch, xi, p_max, eta, sigma2);
    if (res.outage) continue;

    double joint = 0.0;
    for (int a = 0; a < 360; ++a)
      for (int b = 0; b < 360; ++b) {
        PhaseShift ps;
        ps.eta = eta;
        ps.phi.resize(2);
        const double ta = a * std::numbers::pi / 180.0;
        const double tb = b * std::numbers::pi / 180.0;
        ps.phi << Complex(std::cos(ta), std::sin(ta)),
            Complex(std::cos(tb), std::sin(tb));
        try {
          const Precoder pre = zf_precoder(ch, ps);
          joint = std::max(joint,
                           max_t_bisection(pre.W, xi, sigma2, p_max, 1e-7).t * xi.sum());
        } catch (const RankDeficientError&) {
        }
      }
    worst_ratio = std::min(worst_ratio, res.sum_se / joint);
  }
  const double dt = seconds_since(t0);
  std::ostringstream os;
  os << "20 seeded K=M=2, N=2 instances vs 1-degree joint grid: worst SE ratio "
     << worst_ratio << " (>= 0.98), " << dt << " s (< 120 s)";
  report(9, worst_ratio >= 0.98 && dt < 120.0, os.str());
}

// --------------------------------------------------------------- criterion 10

std::string run_csv_once(const ExperimentSpec& spec, const std::string& path) {
  write_records_csv(run_experiment(spec), path);
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void criterion_10_determinism() {
  ExperimentSpec spec;
  spec.sweep_values = {0.0};
  spec.trials = 10;
  spec.base_seed = 123;
  spec.xi_ratios = RealVector::Ones(4);
  const std::string a = run_csv_once(spec, "acceptance_run_a.csv");
  const std::string b = run_csv_once(spec, "acceptance_run_b.csv");
  std::remove("acceptance_run_a.csv");
  std::remove("acceptance_run_b.csv");
  report(10, !a.empty() && a == b,
         "two identical runs produce byte-identical record CSVs (" +
             std::to_string(a.size()) + " bytes)");
}

}  // namespace

int main() {
  const auto t0 = std::chrono::steady_clock::now();
  criterion_1_penrose();
  criterion_2_identity_suite();
  criterion_3_power_exactness();
  criterion_4_monotone();
  criteria_5_and_8();
  criterion_6_n_sweep();
  criterion_7_d_sweep();
  criterion_9_joint_oracle();
  criterion_10_determinism();
  std::printf("acceptance: %d of 10 criteria failed, total %.1f s\n", g_failures,
              seconds_since(t0));
  return g_failures;
}
