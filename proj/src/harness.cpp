#include "risfair/harness.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

namespace risfair {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.15g", v);
  return buf;
}

constexpr int kMaxResamples = 32;

}  // namespace

const char* sweep_variable_name(SweepVariable v) {
  switch (v) {
    case SweepVariable::pmax_dbm: return "pmax_dbm";
    case SweepVariable::n_elements: return "n_elements";
    case SweepVariable::ris_distance_m: return "ris_distance_m";
  }
  return "?";
}

SweepVariable sweep_variable_from_string(const std::string& s) {
  if (s == "pmax" || s == "pmax_dbm") return SweepVariable::pmax_dbm;
  if (s == "n" || s == "n_elements") return SweepVariable::n_elements;
  if (s == "d" || s == "ris_distance_m") return SweepVariable::ris_distance_m;
  throw ConfigError("sweep variable must be one of pmax|n|d, got '" + s + "'");
}

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t x = seed ^ (salt * 0x9E3779B97F4A7C15ull + 0xD1B54A32D192ED03ull);
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

void ExperimentSpec::validate() const {
  if (trials < 1) throw ConfigError("experiment.trials must be >= 1");
  if (sweep_values.empty()) throw ConfigError("experiment.values must be nonempty");
  if (bs_antennas < 1) throw ConfigError("experiment.m must be >= 1");
  if (users < 1) throw ConfigError("experiment.k must be >= 1");
  if (users > bs_antennas)
    throw ConfigError("experiment.k must not exceed experiment.m (ZF needs M >= K)");
  if (ris_elements < 1) throw ConfigError("experiment.n must be >= 1");
  if (ris_distance_m <= 0.0) throw ConfigError("experiment.d must be > 0");
  if (!(eta > 0.0 && eta <= 1.0)) throw ConfigError("experiment.eta must lie in (0,1]");
  if (xi_ratios.size() != users)
    throw ConfigError("experiment.xi must list exactly k ratios");
  if (xi_ratios.minCoeff() <= 0.0) throw ConfigError("experiment.xi: ratios must be > 0");
  if (bandwidth_hz <= 0.0) throw ConfigError("experiment.bandwidth_hz must be > 0");
  if (methods.empty()) throw ConfigError("experiment.methods must be nonempty");
  for (const auto& m : methods)
    if (m != "proposed" && m != "random_phase" && m != "non_ris")
      throw ConfigError("experiment.methods: unknown method '" + m + "'");
  if (sweep == SweepVariable::n_elements)
    for (double v : sweep_values)
      if (v < 1.0 || v != std::floor(v))
        throw ConfigError("experiment.values: n_elements sweep needs positive integers");
  pathloss.validate();
}

ExperimentSpec ExperimentSpec::from_config(const Config& cfg) {
  ExperimentSpec spec;
  spec.sweep = sweep_variable_from_string(cfg.get_string("experiment.sweep", "pmax"));
  spec.sweep_values = cfg.get_double_list("experiment.values", spec.sweep_values);
  spec.trials = cfg.get_int("experiment.trials", spec.trials);
  spec.base_seed = cfg.get_uint64("experiment.base_seed", spec.base_seed);
  spec.bs_antennas = cfg.get_int("experiment.m", spec.bs_antennas);
  spec.users = cfg.get_int("experiment.k", spec.users);
  spec.ris_elements = cfg.get_int("experiment.n", spec.ris_elements);
  spec.ris_distance_m = cfg.get_double("experiment.d", spec.ris_distance_m);
  spec.eta = cfg.get_double("experiment.eta", spec.eta);
  spec.bandwidth_hz = cfg.get_double("experiment.bandwidth_hz", spec.bandwidth_hz);
  spec.psd_dbm_per_hz = cfg.get_double("experiment.psd_dbm_per_hz", spec.psd_dbm_per_hz);
  spec.pmax_dbm = cfg.get_double("experiment.pmax_dbm", spec.pmax_dbm);
  spec.threads = cfg.get_int("experiment.threads", spec.threads);

  {
    std::vector<double> xi{1.0, 1.0, 1.0, 1.0};
    xi.resize(static_cast<std::size_t>(spec.users), 1.0);
    if (cfg.has("experiment.xi")) {
      const auto parsed = parse_double_list(cfg.get_string("experiment.xi", ""), ':',
                                            "experiment.xi");
      xi = parsed;
    }
    spec.xi_ratios = Eigen::Map<const RealVector>(xi.data(), static_cast<Index>(xi.size()));
  }
  if (cfg.has("experiment.methods")) {
    spec.methods.clear();
    std::istringstream in(cfg.get_string("experiment.methods", ""));
    std::string item;
    while (std::getline(in, item, ',')) {
      item.erase(0, item.find_first_not_of(" \t"));
      item.erase(item.find_last_not_of(" \t") + 1);
      if (!item.empty()) spec.methods.push_back(item);
    }
  }

  spec.pathloss.reference_loss_db =
      cfg.get_double("channel.ref_loss_db", spec.pathloss.reference_loss_db);
  spec.pathloss.exponent_bs_user =
      cfg.get_double("channel.alpha_bs_user", spec.pathloss.exponent_bs_user);
  spec.pathloss.exponent_bs_ris =
      cfg.get_double("channel.alpha_bs_ris", spec.pathloss.exponent_bs_ris);
  spec.pathloss.exponent_ris_user =
      cfg.get_double("channel.alpha_ris_user", spec.pathloss.exponent_ris_user);
  spec.user_center.x() = cfg.get_double("channel.user_center_x", spec.user_center.x());
  spec.user_center.y() = cfg.get_double("channel.user_center_y", spec.user_center.y());
  spec.user_radius_m = cfg.get_double("channel.user_radius_m", spec.user_radius_m);
  spec.freeze_positions =
      cfg.get_bool("channel.freeze_positions", spec.freeze_positions);

  spec.solver.max_outer = cfg.get_int("solver.max_outer", spec.solver.max_outer);
  spec.solver.outer_tol = cfg.get_double("solver.tol", spec.solver.outer_tol);
  spec.solver.restarts = cfg.get_int("solver.restarts", spec.solver.restarts);

  spec.solver.phase.max_dual_iters =
      cfg.get_int("phase.max_dual_iters", spec.solver.phase.max_dual_iters);
  spec.solver.phase.step0 = cfg.get_double("phase.step0", spec.solver.phase.step0);
  spec.solver.phase.y_min = cfg.get_double("phase.y_min", spec.solver.phase.y_min);
  spec.solver.phase.use_literal_lemma1 =
      cfg.get_bool("phase.use_literal_lemma1", spec.solver.phase.use_literal_lemma1);
  spec.solver.phase.polish_sweeps =
      cfg.get_int("phase.polish_sweeps", spec.solver.phase.polish_sweeps);
  spec.solver.phase.polish_coarse =
      cfg.get_int("phase.polish_coarse", spec.solver.phase.polish_coarse);

  spec.solver.power.bisect_tol =
      cfg.get_double("power.bisect_tol", spec.solver.power.bisect_tol);
  spec.solver.power.lagrangian_enabled =
      cfg.get_bool("power.lagrangian_enabled", spec.solver.power.lagrangian_enabled);
  spec.solver.power.max_iters =
      cfg.get_int("power.max_iters", spec.solver.power.max_iters);
  spec.solver.power.step0 = cfg.get_double("power.step0", spec.solver.power.step0);
  return spec;
}

int resolve_thread_count(int requested, std::size_t work_items) {
  int n = requested > 0 ? requested
                        : static_cast<int>(std::thread::hardware_concurrency());
  if (n < 1) n = 1;
  if (const char* env = std::getenv("RISFAIR_THREADS")) {
    const int cap = std::atoi(env);
    if (cap > 0) n = std::min(n, cap);
  }
  return static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(n),
                                                std::max<std::size_t>(work_items, 1)));
}

namespace {

struct WorkItem {
  std::size_t value_index;
  int trial;
};

/// All methods evaluated on the same realization.
std::vector<TrialRecord> evaluate_item(const ExperimentSpec& spec, double sweep_value,
                                       int trial, double sigma2) {
  int m = spec.bs_antennas;
  int k = spec.users;
  int n = spec.ris_elements;
  double d = spec.ris_distance_m;
  double p_max = dbm_to_watts(spec.pmax_dbm);
  switch (spec.sweep) {
    case SweepVariable::pmax_dbm: p_max = dbm_to_watts(sweep_value); break;
    case SweepVariable::n_elements: n = static_cast<int>(sweep_value); break;
    case SweepVariable::ris_distance_m: d = sweep_value; break;
  }

  const FairnessSpec xi = FairnessSpec::from_ratios(spec.xi_ratios);
  const std::uint64_t trial_seed = spec.base_seed + static_cast<std::uint64_t>(trial);

  std::vector<TrialRecord> rows;
  for (int attempt = 0; attempt <= kMaxResamples; ++attempt) {
    const std::uint64_t seed =
        attempt == 0 ? trial_seed
                     : derive_seed(trial_seed, static_cast<std::uint64_t>(attempt));
    Geometry geom;
    geom.ris_position = {d, 50.0};
    geom.user_positions =
        place_users(spec.freeze_positions ? spec.base_seed : seed, k,
                    spec.user_center, spec.user_radius_m);
    const ChannelSet ch = sample_channels(seed, geom, spec.pathloss, m, n, k);

    rows.clear();
    bool any_outage = false;
    for (const auto& method : spec.methods) {
      SolveResult sr;
      if (method == "proposed")
        sr = solve(ch, xi, p_max, spec.eta, sigma2, spec.solver);
      else if (method == "random_phase")
        sr = baseline_random_phase(ch, xi, p_max, spec.eta, sigma2, seed, spec.solver);
      else
        sr = baseline_non_ris(ch, xi, p_max, sigma2, spec.solver);
      any_outage = any_outage || sr.outage;

      TrialRecord rec;
      rec.trial = trial;
      rec.seed = seed;
      rec.method = method;
      rec.sweep_var = sweep_variable_name(spec.sweep);
      rec.sweep_value = sweep_value;
      rec.sum_se = sr.sum_se;
      rec.t = sr.power.t;
      rec.per_user_rates = sr.per_user_rates;
      rec.consumed_power = sr.power.consumed_power;
      rec.outer_iters = sr.outer_iters;
      rec.surrogate_deviation = sr.surrogate_deviation;
      rec.outage = sr.outage;
      rec.resamples = attempt;
      rec.dual_route_gap = sr.dual_route_gap;
      rows.push_back(std::move(rec));
    }
    if (!any_outage) break;
  }
  return rows;
}

}  // namespace

std::vector<TrialRecord> run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  const double sigma2 = noise_power(spec.bandwidth_hz, spec.psd_dbm_per_hz);

  std::vector<WorkItem> items;
  for (std::size_t vi = 0; vi < spec.sweep_values.size(); ++vi)
    for (int tr = 0; tr < spec.trials; ++tr) items.push_back({vi, tr});

  std::vector<std::vector<TrialRecord>> results(items.size());
  std::atomic<std::size_t> next{0};
  const int threads = resolve_thread_count(spec.threads, items.size());

  const auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= items.size()) return;
      const WorkItem& item = items[i];
      results[i] = evaluate_item(spec, spec.sweep_values[item.value_index], item.trial,
                                 sigma2);
    }
  };

  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  // merge in deterministic (sweep_value, trial, method) order
  std::vector<TrialRecord> records;
  records.reserve(items.size() * spec.methods.size());
  for (auto& group : results)
    for (auto& rec : group) records.push_back(std::move(rec));
  return records;
}

std::vector<SummaryRow> summarize(const std::vector<TrialRecord>& records) {
  if (records.empty()) throw std::invalid_argument("summarize: no records");

  struct Acc {
    std::string method;
    double value = 0.0;
    double sum = 0.0, sumsq = 0.0, iters = 0.0;
    int n = 0, outages = 0, total = 0;
  };
  std::vector<Acc> accs;  // cells keep first-appearance order
  const auto index_of = [&](const std::string& method, double value) {
    for (std::size_t i = 0; i < accs.size(); ++i)
      if (accs[i].method == method && accs[i].value == value) return i;
    Acc a;
    a.method = method;
    a.value = value;
    accs.push_back(std::move(a));
    return accs.size() - 1;
  };

  for (const auto& rec : records) {
    Acc& a = accs[index_of(rec.method, rec.sweep_value)];
    ++a.total;
    if (rec.outage) {
      ++a.outages;
      continue;
    }
    a.sum += rec.sum_se;
    a.sumsq += rec.sum_se * rec.sum_se;
    a.iters += rec.outer_iters;
    ++a.n;
  }

  std::vector<SummaryRow> rows(accs.size());
  for (std::size_t i = 0; i < accs.size(); ++i) {
    const Acc& a = accs[i];
    SummaryRow& r = rows[i];
    r.method = a.method;
    r.sweep_value = a.value;
    r.count = a.n;
    r.outage_rate = a.total > 0 ? double(a.outages) / a.total : 0.0;
    if (a.n == 0) {
      r.empty = true;
      continue;
    }
    r.mean_se = a.sum / a.n;
    r.std_se = a.n > 1
                   ? std::sqrt(std::max(0.0, (a.sumsq - a.sum * a.sum / a.n) / (a.n - 1)))
                   : 0.0;
    const double half = 1.959963984540054 * r.std_se / std::sqrt(double(a.n));
    r.ci95_lo = r.mean_se - half;
    r.ci95_hi = r.mean_se + half;
    r.mean_iters = a.iters / a.n;
  }
  return rows;
}

void write_records_csv(const std::vector<TrialRecord>& records,
                       const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_records_csv: cannot open '" + path + "'");
  const Index k = records.empty() ? 0 : records.front().per_user_rates.size();
  out << "trial,seed,method,sweep_var,sweep_value,sum_se_bpshz,t";
  for (Index u = 1; u <= k; ++u) out << ",rate_u" << u;
  out << ",consumed_power_w,outer_iters,surrogate_dev,outage\n";
  for (const auto& rec : records) {
    if (rec.per_user_rates.size() != k)
      throw std::runtime_error("write_records_csv: inconsistent user counts");
    out << rec.trial << ',' << rec.seed << ',' << rec.method << ',' << rec.sweep_var
        << ',' << fmt(rec.sweep_value) << ',' << fmt(rec.sum_se) << ',' << fmt(rec.t);
    for (Index u = 0; u < k; ++u) out << ',' << fmt(rec.per_user_rates(u));
    out << ',' << fmt(rec.consumed_power) << ',' << rec.outer_iters << ','
        << fmt(rec.surrogate_deviation) << ',' << (rec.outage ? 1 : 0) << '\n';
  }
  if (!out) throw std::runtime_error("write_records_csv: write failed for '" + path + "'");
}

std::vector<TrialRecord> read_records_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_records_csv: cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("read_records_csv: missing header in '" + path + "'");
  int rate_cols = 0;
  {
    std::istringstream hs(line);
    std::string col;
    while (std::getline(hs, col, ','))
      if (col.rfind("rate_u", 0) == 0) ++rate_cols;
  }
  std::vector<TrialRecord> records;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ls, field, ',')) fields.push_back(field);
    if (fields.size() != static_cast<std::size_t>(11 + rate_cols))
      throw std::runtime_error("read_records_csv: bad field count in '" + path + "'");
    TrialRecord rec;
    std::size_t i = 0;
    rec.trial = std::stoi(fields[i++]);
    rec.seed = std::stoull(fields[i++]);
    rec.method = fields[i++];
    rec.sweep_var = fields[i++];
    rec.sweep_value = std::stod(fields[i++]);
    rec.sum_se = std::stod(fields[i++]);
    rec.t = std::stod(fields[i++]);
    rec.per_user_rates.resize(rate_cols);
    for (int u = 0; u < rate_cols; ++u) rec.per_user_rates(u) = std::stod(fields[i++]);
    rec.consumed_power = std::stod(fields[i++]);
    rec.outer_iters = std::stoi(fields[i++]);
    rec.surrogate_deviation = std::stod(fields[i++]);
    rec.outage = fields[i++] != "0";
    records.push_back(std::move(rec));
  }
  return records;
}

void write_summary_csv(const std::vector<SummaryRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_summary_csv: cannot open '" + path + "'");
  out << "method,sweep_value,mean_se,std_se,ci95_lo,ci95_hi,mean_iters,outage_rate\n";
  for (const auto& r : rows) {
    out << r.method << ',' << fmt(r.sweep_value) << ',';
    if (r.empty)
      out << ",,,,";
    else
      out << fmt(r.mean_se) << ',' << fmt(r.std_se) << ',' << fmt(r.ci95_lo) << ','
          << fmt(r.ci95_hi) << ',' << fmt(r.mean_iters);
    out << ',' << fmt(r.outage_rate) << '\n';
  }
  if (!out) throw std::runtime_error("write_summary_csv: write failed for '" + path + "'");
}

void write_gnuplot_script(const std::vector<SummaryRow>& rows, SweepVariable sweep,
                          const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_gnuplot_script: cannot open '" + path + "'");
  std::vector<std::string> methods;
  for (const auto& r : rows) {
    bool seen = false;
    for (const auto& m : methods) seen = seen || m == r.method;
    if (!seen) methods.push_back(r.method);
  }
  out << "# Average spectral efficiency vs " << sweep_variable_name(sweep) << "\n";
  out << "set datafile separator ','\n";
  out << "set xlabel '" << sweep_variable_name(sweep) << "'\n";
  out << "set ylabel 'average SE [bits/s/Hz]'\n";
  out << "set key left top\n set grid\n";
  for (std::size_t i = 0; i < methods.size(); ++i) {
    out << "$m" << i << " << EOD\n";
    for (const auto& r : rows)
      if (r.method == methods[i] && !r.empty)
        out << fmt(r.sweep_value) << ',' << fmt(r.mean_se) << ',' << fmt(r.ci95_lo)
            << ',' << fmt(r.ci95_hi) << '\n';
    out << "EOD\n";
  }
  out << "plot ";
  for (std::size_t i = 0; i < methods.size(); ++i) {
    if (i) out << ", \\\n     ";
    out << "$m" << i << " using 1:2 with linespoints title '" << methods[i] << "', "
        << "$m" << i << " using 1:2:3:4 with yerrorbars notitle";
  }
  out << "\npause -1 'press enter to close'\n";
}

}  // namespace risfair
