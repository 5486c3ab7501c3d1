#pragma once

#include <string>
#include <vector>

#include "risfair/config.hpp"
#include "risfair/solver.hpp"

namespace risfair {

enum class SweepVariable { pmax_dbm, n_elements, ris_distance_m };

const char* sweep_variable_name(SweepVariable v);
SweepVariable sweep_variable_from_string(const std::string& s);

double dbm_to_watts(double dbm);

/// Deterministic seed derivation for substreams (outage resampling).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt);

struct ExperimentSpec {
  SweepVariable sweep = SweepVariable::pmax_dbm;
  std::vector<double> sweep_values{-10.0, 0.0, 10.0};
  int trials = 100;
  std::uint64_t base_seed = 1;

  int bs_antennas = 4;
  int users = 4;
  int ris_elements = 10;
  double ris_distance_m = 100.0;
  double eta = 0.8;
  RealVector xi_ratios;  // length = users; defaults to all ones
  double bandwidth_hz = 180e3;
  double psd_dbm_per_hz = -174.0;
  double pmax_dbm = 0.0;  // used when pmax is not the sweep variable
  std::vector<std::string> methods{"proposed", "random_phase", "non_ris"};

  PathLossParams pathloss;
  Eigen::Vector2d user_center{200.0, 0.0};
  double user_radius_m = 10.0;
  bool freeze_positions = false;

  SolverConfig solver;
  int threads = 0;  // 0: hardware concurrency, capped by RISFAIR_THREADS

  void validate() const;
  static ExperimentSpec from_config(const Config& cfg);
};

struct TrialRecord {
  int trial = 0;
  std::uint64_t seed = 0;
  std::string method;
  std::string sweep_var;
  double sweep_value = 0.0;
  double sum_se = 0.0;
  double t = 0.0;
  RealVector per_user_rates;
  double consumed_power = 0.0;
  int outer_iters = 0;
  double surrogate_deviation = 0.0;
  bool outage = false;
  int resamples = 0;           // not serialized; CSV schema is fixed
  double dual_route_gap = 0.0; // not serialized; set when power.lagrangian_enabled
};

struct SummaryRow {
  std::string method;
  double sweep_value = 0.0;
  double mean_se = 0.0;
  double std_se = 0.0;
  double ci95_lo = 0.0;
  double ci95_hi = 0.0;
  double mean_iters = 0.0;
  double outage_rate = 0.0;
  int count = 0;       // non-outage records
  bool empty = false;  // all records in the cell were outages
};

/// Runs every requested method on the same realization per (sweep value,
/// trial); trial seeds are base_seed + trial_index; outage realizations are
/// resampled with fresh derived seeds. Deterministic for a given spec.
std::vector<TrialRecord> run_experiment(const ExperimentSpec& spec);

std::vector<SummaryRow> summarize(const std::vector<TrialRecord>& records);

/// Columns: trial,seed,method,sweep_var,sweep_value,sum_se_bpshz,t,
/// rate_u1..rate_uK,consumed_power_w,outer_iters,surrogate_dev,outage
void write_records_csv(const std::vector<TrialRecord>& records,
                       const std::string& path);
std::vector<TrialRecord> read_records_csv(const std::string& path);

/// Columns: method,sweep_value,mean_se,std_se,ci95_lo,ci95_hi,mean_iters,
/// outage_rate
void write_summary_csv(const std::vector<SummaryRow>& rows, const std::string& path);

/// Self-contained gnuplot script (data inlined) next to the summary CSV.
void write_gnuplot_script(const std::vector<SummaryRow>& rows, SweepVariable sweep,
                          const std::string& path);

int resolve_thread_count(int requested, std::size_t work_items);

}  // namespace risfair
