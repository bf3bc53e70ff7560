#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mtag/controller.hpp"
#include "mtag/estimators.hpp"

namespace mtag {

// Parameters of one experiment run. correlation == 0 selects the
// independent session model. Per-trial generators are seeded seed + trial
// index, so runs are reproducible and trials are independent.
struct ExperimentConfig {
  std::int64_t n_tags = 500;
  double error_probability = 0.2;
  double correlation = 0.0;
  std::vector<Estimator> estimators{Estimator::Rme, Estimator::Regm,
                                    Estimator::Schnabel};
  int r_min = 2;
  int r_max = 12;
  int trials = 1000;
  std::uint64_t seed = 1;
  StopPolicy policy{};
};

// Throws std::invalid_argument naming the offending field.
void validate(const ExperimentConfig& config);

struct SweepPoint {
  Estimator estimator = Estimator::Regm;
  int sessions = 0;
  double mean_p_hat = 0.0;
  double mean_n_hat = 0.0;
  double mse_n = 0.0;
  double mean_p_m = 0.0;
  int defined_n_trials = 0;
};

struct SweepResult {
  ExperimentConfig config;
  // Estimator-major, sessions ascending within each estimator.
  std::vector<SweepPoint> points;
  // Mean observed distinct tag count per session count (index 0 = r_min).
  std::vector<double> mean_distinct;
  // Empirical per-session error rate over all trials (index 0 = session 1).
  std::vector<double> session_error_rate;
};

// Runs trials sessions-first: each trial generates r_max sessions and every
// estimator sees the same histories, so estimator curves are comparable.
SweepResult run_sweep(const ExperimentConfig& config);

struct StopTrial {
  int trial = 0;
  int stopped_at = 0;
  bool cap_reached = false;
  bool missed = false;
  std::int64_t distinct = 0;
};

struct StopResult {
  ExperimentConfig config;
  Estimator estimator = Estimator::Regm;
  std::vector<StopTrial> trials;
  double miss_rate = 0.0;
  double median_stop = 0.0;
};

// Sequential-stopping experiment: one controller run per trial, with ground
// truth (was any tag actually missed at stop) taken from the generated
// history.
StopResult run_stop(const ExperimentConfig& config, Estimator estimator);

struct VerifyResult {
  double expectation_max_deviation = 0.0;   // enumeration vs closed form
  double cardinality_max_deviation = 0.0;   // enumeration vs true size
  double bias_at_reference = 0.0;           // 46 tags, p = 0.9
  std::int64_t min_tags_for_percent_bias = 0;
  bool expectation_pass = false;
  bool cardinality_pass = false;

  bool pass() const { return expectation_pass && cardinality_pass; }
};

inline constexpr double kExpectationTolerance = 1e-12;
inline constexpr double kCardinalityTolerance = 1e-9;

// Sweeps the exact enumeration over populations 1..12 and a 0.1-step
// probability grid, checking the estimator-mean closed form and the
// unbiasedness of the cardinality estimate.
VerifyResult run_verify();

// CSV emission. Data rows use a fixed schema
//   estimator,R,mean_p_hat,mean_n_hat,mse_n,mean_p_m,trials,seed
// with metadata (command, RNG algorithm, seed, parameters, per-session
// series) on '#'-prefixed lines. Output is bytewise deterministic for a
// given config.
void write_sweep_csv(const std::vector<SweepResult>& blocks,
                     std::string_view command, std::ostream& out);
void write_stop_csv(const StopResult& result, std::ostream& out);
void write_verify_report(const VerifyResult& result, std::ostream& out);

// Named parameter sets reproducing the published sweeps. A preset expands to
// one or more config blocks (e.g. one per correlation level).
struct Preset {
  std::string name;
  std::string command;  // "simulate", "correlated" or "stop"
  std::vector<ExperimentConfig> blocks;
};

std::optional<Preset> find_preset(std::string_view name);
std::vector<std::string> preset_names();

// Shortest round-trip decimal rendering, locale-independent; used for all
// floating-point fields in CSV output.
std::string format_double(double value);

}  // namespace mtag
