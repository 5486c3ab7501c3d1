// risfair: seeded Monte Carlo sweeps for RIS-aided multiuser MISO downlinks
// with zero-forcing precoding and proportional rate fairness.

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "risfair/harness.hpp"
#include "risfair/linalg.hpp"

namespace {

using namespace risfair;

int run_command(const std::string& config_path, const std::string& sweep,
                const std::string& values, int trials, const std::string& xi,
                long long seed, const std::string& out_prefix) {
  Config cfg;
  if (!config_path.empty()) cfg = Config::from_file(config_path);
  if (!sweep.empty()) cfg.set("experiment.sweep", sweep);
  if (!values.empty()) cfg.set("experiment.values", values);
  if (trials > 0) cfg.set("experiment.trials", std::to_string(trials));
  if (!xi.empty()) cfg.set("experiment.xi", xi);
  if (seed >= 0) cfg.set("experiment.base_seed", std::to_string(seed));

  const ExperimentSpec spec = ExperimentSpec::from_config(cfg);
  spec.validate();

  const auto records = run_experiment(spec);
  const auto rows = summarize(records);

  write_records_csv(records, out_prefix + "_records.csv");
  write_summary_csv(rows, out_prefix + "_summary.csv");
  write_gnuplot_script(rows, spec.sweep, out_prefix + "_plot.gp");

  std::printf("%-14s %12s %12s %10s %8s\n", "method", "sweep_value", "mean_se",
              "ci95_half", "outage");
  for (const auto& r : rows) {
    if (r.empty) {
      std::printf("%-14s %12g %12s %10s %8.3f\n", r.method.c_str(), r.sweep_value,
                  "-", "-", r.outage_rate);
      continue;
    }
    std::printf("%-14s %12g %12.5f %10.5f %8.3f\n", r.method.c_str(), r.sweep_value,
                r.mean_se, 0.5 * (r.ci95_hi - r.ci95_lo), r.outage_rate);
  }
  if (spec.solver.power.lagrangian_enabled) {
    double worst_gap = 0.0;
    int unconverged = 0;
    for (const auto& rec : records) {
      if (rec.dual_route_gap < 0.0)
        ++unconverged;
      else
        worst_gap = std::max(worst_gap, rec.dual_route_gap);
    }
    std::printf("dual power route cross-check: worst relative gap %.3g, "
                "%d non-converged run(s)\n",
                worst_gap, unconverged);
  }
  std::printf("wrote %s_records.csv, %s_summary.csv, %s_plot.gp\n",
              out_prefix.c_str(), out_prefix.c_str(), out_prefix.c_str());
  return 0;
}

bool check(bool ok, const char* what, int& failures) {
  std::printf("  [%s] %s\n", ok ? "ok" : "FAIL", what);
  if (!ok) ++failures;
  return ok;
}

int selftest_command() {
  int failures = 0;
  Rng rng(20240901);
  const auto randm = [&](Index r, Index c) {
    ComplexMatrix m(r, c);
    for (Index j = 0; j < c; ++j)
      for (Index i = 0; i < r; ++i) m(i, j) = rng.complex_gaussian();
    return m;
  };

  {
    bool ok = true;
    for (int i = 0; i < 50 && ok; ++i) {
      const Index r = 1 + static_cast<Index>(rng.uniform() * 6);
      const Index c = 1 + static_cast<Index>(rng.uniform() * 6);
      const ComplexMatrix a = randm(r, c);
      const ComplexMatrix ap = pinv(a);
      const double s = std::max(1.0, a.norm());
      ok = (a * ap * a - a).norm() <= 1e-9 * s && (ap * a * ap - ap).norm() <= 1e-9 * s &&
           ((a * ap) - (a * ap).adjoint()).norm() <= 1e-9 * s &&
           ((ap * a) - (ap * a).adjoint()).norm() <= 1e-9 * s;
    }
    check(ok, "pseudo-inverse satisfies the four Penrose conditions", failures);
  }
  {
    bool ok = true;
    for (int i = 0; i < 20 && ok; ++i) {
      const ComplexMatrix a = randm(3, 4), b = randm(4, 2), c = randm(2, 3);
      const ComplexVector lhs = vec(a * b * c);
      const ComplexVector rhs = kron(c.transpose(), a) * vec(b);
      ok = (lhs - rhs).norm() <= 1e-12 * std::max(1.0, lhs.norm());
    }
    check(ok, "vec(ABC) = (C^T kron A) vec(B)", failures);
    const ComplexMatrix a = randm(4, 3);
    check((unvec(vec(a), 4, 3) - a).norm() == 0.0, "vec/unvec round trip", failures);
  }
  check(std::abs(noise_power(1.0, -30.0) - 1e-6) < 1e-18,
        "noise power: -30 dBm/Hz over 1 Hz is 1 uW", failures);
  {
    const ComplexMatrix w = pinv(randm(3, 4));
    const FairnessSpec xi = FairnessSpec::from_ratios((RealVector(3) << 1, 2, 3).finished());
    const PowerSolution sol = max_t_bisection(w, xi, 0.01, 2.0);
    bool ok = sol.consumed_power <= 2.0 * (1 + 1e-9) &&
              sol.consumed_power >= 2.0 * (1 - 1e-6);
    for (Index k = 0; k < 3; ++k)
      ok = ok && std::abs(sol.rates(k) / xi.xi(k) - sol.t) <= 1e-9 * sol.t;
    check(ok, "power bisection: active budget and exact proportionality", failures);
  }
  {
    Geometry geom;
    geom.ris_position = {100.0, 50.0};
    geom.user_positions = place_users(7, 4, {200.0, 0.0}, 10.0);
    const ChannelSet ch = sample_channels(7, geom, PathLossParams{}, 4, 10, 4);
    const double sigma2 = noise_power(180e3, -174.0);
    const SolveResult sr = solve(ch, FairnessSpec::equal(4), dbm_to_watts(0.0), 0.8,
                                 sigma2);
    bool mono = !sr.outage;
    for (std::size_t i = 1; i < sr.trace.size(); ++i)
      mono = mono && sr.trace[i].t >= sr.trace[i - 1].t - 1e-12;
    bool feas = true;
    for (Index n = 0; n < sr.phase.phi.size(); ++n)
      feas = feas && std::abs(sr.phase.phi(n)) <= 1.0 + 1e-9;
    check(mono, "alternating solve: non-decreasing t trace", failures);
    check(feas, "alternating solve: |phi_n| <= 1", failures);
  }
  {
    ExperimentSpec spec;
    spec.sweep_values = {0.0};
    spec.trials = 2;
    spec.xi_ratios = RealVector::Ones(4);
    spec.solver.phase.max_dual_iters = 20;
    const auto a = run_experiment(spec);
    const auto b = run_experiment(spec);
    bool ok = a.size() == b.size();
    for (std::size_t i = 0; ok && i < a.size(); ++i)
      ok = a[i].sum_se == b[i].sum_se && a[i].seed == b[i].seed;
    check(ok, "experiment runner: deterministic per (spec, seed)", failures);
  }
  std::printf(failures == 0 ? "selftest: all checks passed\n"
                            : "selftest: %d check(s) FAILED\n",
              failures);
  return failures == 0 ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"RIS-aided MISO spectral-efficiency sweeps with proportional fairness"};
  app.require_subcommand(1);

  std::string config_path, sweep, values, xi, out_prefix = "risfair";
  int trials = 0;
  long long seed = -1;

  auto* run = app.add_subcommand("run", "run a Monte Carlo sweep");
  run->add_option("--config", config_path, "key=value config file");
  run->add_option("--sweep", sweep, "sweep variable: pmax|n|d");
  run->add_option("--values", values, "comma-separated sweep values");
  run->add_option("--trials", trials, "trials per sweep value");
  run->add_option("--xi", xi, "proportional ratios, e.g. 1:2:3:4");
  run->add_option("--seed", seed, "base seed");
  run->add_option("--out", out_prefix, "output file prefix");

  auto* selftest = app.add_subcommand("selftest", "run the invariant/oracle suites");

  CLI11_PARSE(app, argc, argv);

  try {
    if (selftest->parsed()) return selftest_command();
    return run_command(config_path, sweep, values, trials, xi, seed, out_prefix);
  } catch (const risfair::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return 2;
  }
}
