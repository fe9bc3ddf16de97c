// The named experiments: each one binds the low-level modules into a
// reproducible run that emits pass/fail check records, a series table, and
// a JSON report.  Everything is driven by a flat ExperimentConfig so a
// report can be replayed bit-for-bit (modulo wall-clock fields) from its
// embedded config.
//
//   recurrence            sequence tables: monotonicity, the product/sum
//                         link, the exponential-decay bound, and the
//                         interval-sum inequality
//   appendix_b            the weighted-average chain certifying p_n
//                         nondecreasing, n = 2..50
//   returns               self-similar runs vs the predicted return-rate
//                         floor: void probability, mean count, and the
//                         dominance certificate against the lambda
//                         intensity
//   speed                 first-passage tails along a fixed ray and the
//                         lag-1 correlation of consecutive passage times
//   ball                  growth of the fully visited ball: D_t
//                         monotonicity, linear-rate median, cross-batch
//                         stability, pilot regression
//   root_visits           linear growth of root visits: V_t monotonicity,
//                         V_40 vs V_20, cross-batch stability, pilot
//                         regression
//   decompose             excursion-composition laws: composed walks vs
//                         uniform/simple path laws, the per-(path, J)
//                         cells, and the insertion-gap tail
//   operator_fixed_point  the star-system operator: empty-input atom mass,
//                         prefix void probabilities vs P_{k+1}/P_1, and
//                         the fixed-point marginals theta vs A(theta)
//   concentration         Poisson tail bounds and the exponential-sum
//                         constant, by direct Monte Carlo
//
// Statistical checks state their margins explicitly in the records
// (bound + margin is what the statistic is compared against); deterministic
// checks carry margin 0.

#ifndef FROGLAB_EXPERIMENTS_HPP
#define FROGLAB_EXPERIMENTS_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace froglab {

struct ExperimentConfig {
  std::string experiment;
  int d = 2;
  double mu = 21.0;
  int n = 500;
  int T = 16;
  std::int64_t trials = 100'000;
  double confidence = 0.99;
  double beta = 2.0;   // interval-sum exponent
  double alpha = 0.5;  // reserved Poisson tail ratio (the grid is fixed)
  std::uint64_t master_seed = 1;
  std::string out_dir = ".";
};

// One verified claim.  `margin` is the slack granted on top of `bound`
// (statistical checks: k standard errors; deterministic ones: the rounding
// allowance).  The direction of the comparison is part of the claim and is
// spelled out in `anchor`; `pass` is its verdict.
struct CheckRecord {
  std::string name;    // stable machine-readable id, unique per report
  std::string anchor;  // the claim in words
  double statistic = 0.0;
  double bound = 0.0;
  double margin = 0.0;
  bool pass = false;
};

struct SeriesTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<CheckRecord> checks;
  SeriesTable series;
  double runtime_seconds = 0.0;   // excluded from replay comparisons
  std::int64_t truncation_events = 0;

  bool all_pass() const;
};

const std::vector<std::string>& experiment_names();

// Per-experiment defaults: the parameter sets the release checks run at.
// Throws ConfigError on an unknown name.
ExperimentConfig default_config(const std::string& experiment);

// Flat-key JSON ({"experiment": "...", "d": 2, "mu": 21.0, ...}) applied
// over the experiment's defaults.  Unknown keys and type mismatches are
// ConfigErrors, as is a missing experiment name.
ExperimentConfig parse_config_json(const std::string& json_text);

// Applies the keys present in `overrides_json` (same schema, experiment
// key optional) on top of `config`; later layers win, so the CLI stacks
// defaults <- config file <- flags.
ExperimentConfig merge_config(const ExperimentConfig& config,
                              const std::string& overrides_json);

// Throws ConfigError naming the violated constraint and the operation
// whose precondition it would break.
void validate_config(const ExperimentConfig& config);

// Dispatches on config.experiment.  All randomness derives from
// (master_seed, trial index), so reports replay exactly.  Engine truncation
// is caught, counted, and surfaced as a failing check rather than thrown.
ExperimentReport run_experiment(const ExperimentConfig& config);

// Deterministic serialization (sorted keys, fixed layout).
std::string report_to_json(const ExperimentReport& report);

void write_report_json(const ExperimentReport& report, const std::string& path);
void write_series_csv(const ExperimentReport& report, const std::string& path);

}  // namespace froglab

#endif  // FROGLAB_EXPERIMENTS_HPP
