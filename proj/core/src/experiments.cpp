#include "mtag/experiments.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <limits>
#include <memory>
#include <ostream>
#include <stdexcept>

#include "mtag/oracle.hpp"
#include "mtag/rng.hpp"
#include "mtag/session_sim.hpp"

namespace mtag {

namespace {

std::unique_ptr<SessionSource> make_source(const ExperimentConfig& config,
                                           std::uint64_t seed) {
  if (config.correlation == 0.0) {
    return std::make_unique<IndependentSessionSource>(
        PopulationParams{config.n_tags, config.error_probability}, seed);
  }
  return std::make_unique<CorrelatedSessionSource>(
      derive_correlation(config.error_probability, config.correlation),
      config.n_tags, seed);
}

struct Accumulator {
  double sum_p = 0.0;
  double sum_p_m = 0.0;
  double sum_n = 0.0;
  double sum_sq_err_n = 0.0;
  int defined_n = 0;

  void add(const EstimateReport& report, double true_n) {
    sum_p += report.p_hat;
    sum_p_m += report.p_m_hat;
    if (report.n_hat.has_value()) {
      sum_n += *report.n_hat;
      const double err = *report.n_hat - true_n;
      sum_sq_err_n += err * err;
      ++defined_n;
    }
  }
};

std::string join_estimators(const std::vector<Estimator>& estimators) {
  std::string out;
  for (const Estimator estimator : estimators) {
    if (!out.empty()) out += ',';
    out += to_string(estimator);
  }
  return out;
}

void write_config_metadata(const ExperimentConfig& config, std::ostream& out) {
  out << "# rng=" << Rng::kAlgorithm << " seed=" << config.seed << '\n';
  out << "# n=" << config.n_tags
      << " p=" << format_double(config.error_probability)
      << " rho=" << format_double(config.correlation)
      << " trials=" << config.trials << " r_min=" << config.r_min
      << " r_max=" << config.r_max
      << " estimators=" << join_estimators(config.estimators) << '\n';
}

}  // namespace

std::string format_double(double value) {
  std::array<char, 32> buffer;
  const auto result =
      std::to_chars(buffer.data(), buffer.data() + buffer.size(), value);
  return std::string(buffer.data(), result.ptr);
}

void validate(const ExperimentConfig& config) {
  if (config.n_tags < 1) {
    throw std::invalid_argument("n_tags must be at least 1");
  }
  if (!(config.error_probability >= 0.0 && config.error_probability <= 1.0)) {
    throw std::invalid_argument("p must lie in [0, 1]");
  }
  if (!(config.correlation >= 0.0 && config.correlation <= 1.0)) {
    throw std::invalid_argument("rho must lie in [0, 1]");
  }
  if (config.correlation > 0.0 && config.error_probability >= 1.0) {
    throw std::invalid_argument("p must be below 1 when rho > 0");
  }
  if (config.estimators.empty()) {
    throw std::invalid_argument("at least one estimator is required");
  }
  for (const Estimator estimator : config.estimators) {
    if (estimator == Estimator::TwoSession &&
        (config.r_min != 2 || config.r_max != 2)) {
      throw std::invalid_argument(
          "estimator two-session requires r_min == r_max == 2");
    }
  }
  if (config.r_min < 2) {
    throw std::invalid_argument("r_min must be at least 2");
  }
  if (config.r_max < config.r_min) {
    throw std::invalid_argument("r_max must be >= r_min");
  }
  if (config.r_max > 64) {
    throw std::invalid_argument("r_max must be at most 64");
  }
  if (config.trials < 1) {
    throw std::invalid_argument("trials must be at least 1");
  }
}

SweepResult run_sweep(const ExperimentConfig& config) {
  validate(config);

  const std::size_t estimator_count = config.estimators.size();
  const std::size_t r_count =
      static_cast<std::size_t>(config.r_max - config.r_min + 1);
  std::vector<Accumulator> cells(estimator_count * r_count);
  std::vector<double> distinct_sums(r_count, 0.0);
  std::vector<double> error_counts(static_cast<std::size_t>(config.r_max),
                                   0.0);
  const double true_n = static_cast<double>(config.n_tags);

  for (int trial = 0; trial < config.trials; ++trial) {
    auto source =
        make_source(config, config.seed + static_cast<std::uint64_t>(trial));
    RunningTally tally(config.n_tags);
    for (int session = 1; session <= config.r_max; ++session) {
      const auto row = source->next_session();
      std::int64_t reads = 0;
      for (std::uint8_t cell : row) reads += cell;
      error_counts[static_cast<std::size_t>(session - 1)] +=
          static_cast<double>(config.n_tags - reads);
      tally.add_session(row);

      if (session < config.r_min) continue;
      const std::size_t r_index =
          static_cast<std::size_t>(session - config.r_min);
      distinct_sums[r_index] += static_cast<double>(tally.distinct());
      const MultiplicityVector kbar = tally.multiplicity();
      for (std::size_t e = 0; e < estimator_count; ++e) {
        cells[e * r_count + r_index].add(
            estimate(config.estimators[e], kbar, tally.schnabel()), true_n);
      }
    }
  }

  SweepResult result;
  result.config = config;
  result.points.reserve(cells.size());
  const double trials = static_cast<double>(config.trials);
  for (std::size_t e = 0; e < estimator_count; ++e) {
    for (std::size_t r = 0; r < r_count; ++r) {
      const Accumulator& cell = cells[e * r_count + r];
      SweepPoint point;
      point.estimator = config.estimators[e];
      point.sessions = config.r_min + static_cast<int>(r);
      point.mean_p_hat = cell.sum_p / trials;
      point.mean_p_m = cell.sum_p_m / trials;
      point.defined_n_trials = cell.defined_n;
      if (cell.defined_n > 0) {
        point.mean_n_hat = cell.sum_n / cell.defined_n;
        point.mse_n = cell.sum_sq_err_n / cell.defined_n;
      } else {
        point.mean_n_hat = std::numeric_limits<double>::quiet_NaN();
        point.mse_n = std::numeric_limits<double>::quiet_NaN();
      }
      result.points.push_back(point);
    }
  }
  result.mean_distinct.reserve(r_count);
  for (double sum : distinct_sums) result.mean_distinct.push_back(sum / trials);
  const double tag_trials = trials * static_cast<double>(config.n_tags);
  result.session_error_rate.reserve(error_counts.size());
  for (double count : error_counts) {
    result.session_error_rate.push_back(count / tag_trials);
  }
  return result;
}

StopResult run_stop(const ExperimentConfig& config, Estimator estimator) {
  validate(config);

  StopResult result;
  result.config = config;
  result.estimator = estimator;
  result.trials.reserve(static_cast<std::size_t>(config.trials));

  int misses = 0;
  for (int trial = 0; trial < config.trials; ++trial) {
    auto source =
        make_source(config, config.seed + static_cast<std::uint64_t>(trial));
    const SessionLog log = run_sequential(*source, estimator, config.policy);
    const TallyResult tallied = tally(log.history);
    const bool missed = tallied.distinct < config.n_tags;
    if (missed) ++misses;
    result.trials.push_back(StopTrial{trial, log.stopped_at, log.cap_reached,
                                      missed, tallied.distinct});
  }

  result.miss_rate =
      static_cast<double>(misses) / static_cast<double>(config.trials);
  std::vector<int> stops;
  stops.reserve(result.trials.size());
  for (const StopTrial& row : result.trials) stops.push_back(row.stopped_at);
  std::sort(stops.begin(), stops.end());
  const std::size_t mid = stops.size() / 2;
  result.median_stop =
      stops.size() % 2 == 1
          ? static_cast<double>(stops[mid])
          : 0.5 * (static_cast<double>(stops[mid - 1]) +
                   static_cast<double>(stops[mid]));
  return result;
}

VerifyResult run_verify() {
  VerifyResult result;
  for (std::int64_t n = 1; n <= kMaxEnumerationTags; ++n) {
    for (int step = 0; step <= 10; ++step) {
      const double p = static_cast<double>(step) / 10.0;
      const double expectation_dev = std::fabs(
          exact_expected_error_estimate(n, p) -
          expected_two_session_estimate(static_cast<double>(n), p));
      result.expectation_max_deviation =
          std::max(result.expectation_max_deviation, expectation_dev);
      if (step < 10) {
        const double cardinality_dev =
            std::fabs(exact_expected_cardinality_estimate(n, p) -
                      static_cast<double>(n));
        result.cardinality_max_deviation =
            std::max(result.cardinality_max_deviation, cardinality_dev);
      }
    }
  }
  result.expectation_pass =
      result.expectation_max_deviation <= kExpectationTolerance;
  result.cardinality_pass =
      result.cardinality_max_deviation <= kCardinalityTolerance;

  result.bias_at_reference = two_session_estimator_bias(46.0, 0.9);
  std::int64_t min_tags = 1;
  while (two_session_estimator_bias(static_cast<double>(min_tags), 0.9) >=
         0.01) {
    ++min_tags;
  }
  result.min_tags_for_percent_bias = min_tags;
  return result;
}

void write_sweep_csv(const std::vector<SweepResult>& blocks,
                     std::string_view command, std::ostream& out) {
  if (blocks.empty()) return;
  out << "# mtag " << command << '\n';
  write_config_metadata(blocks.front().config, out);
  out << "estimator,R,mean_p_hat,mean_n_hat,mse_n,mean_p_m,trials,seed\n";
  const bool correlated = command == "correlated";
  for (const SweepResult& block : blocks) {
    const ExperimentConfig& config = block.config;
    if (blocks.size() > 1) {
      out << "# block p=" << format_double(config.error_probability)
          << " rho=" << format_double(config.correlation) << '\n';
    }
    for (const SweepPoint& point : block.points) {
      out << to_string(point.estimator) << ',' << point.sessions << ','
          << format_double(point.mean_p_hat) << ','
          << format_double(point.mean_n_hat) << ','
          << format_double(point.mse_n) << ','
          << format_double(point.mean_p_m) << ',' << config.trials << ','
          << config.seed << '\n';
    }
    for (std::size_t r = 0; r < block.mean_distinct.size(); ++r) {
      out << "# mean_distinct," << (config.r_min + static_cast<int>(r)) << ','
          << format_double(block.mean_distinct[r]) << '\n';
    }
    if (correlated) {
      for (std::size_t s = 0; s < block.session_error_rate.size(); ++s) {
        out << "# session_error_rate," << (s + 1) << ','
            << format_double(block.session_error_rate[s]) << '\n';
      }
    }
    if (config.r_min <= 2 && 2 <= config.r_max) {
      // Small-population bias of the two-session estimator at the estimated
      // operating point; reported, never subtracted.
      for (const SweepPoint& point : block.points) {
        if (point.sessions == 2 && point.defined_n_trials > 0) {
          out << "# two_session_bias_estimate,"
              << to_string(point.estimator) << ','
              << format_double(two_session_estimator_bias(point.mean_n_hat,
                                                          point.mean_p_hat))
              << '\n';
        }
      }
    }
  }
}

void write_stop_csv(const StopResult& result, std::ostream& out) {
  const ExperimentConfig& config = result.config;
  out << "# mtag stop\n";
  write_config_metadata(config, out);
  out << "# estimator=" << to_string(result.estimator)
      << " threshold=" << format_double(config.policy.threshold)
      << " margin=" << config.policy.margin_sessions
      << " bias=" << format_double(config.policy.bias_addend)
      << " min_sessions=" << config.policy.min_sessions
      << " max_sessions=" << config.policy.max_sessions << '\n';
  out << "trial,stop_r,cap_reached,missed,distinct\n";
  for (const StopTrial& row : result.trials) {
    out << row.trial << ',' << row.stopped_at << ','
        << (row.cap_reached ? 1 : 0) << ',' << (row.missed ? 1 : 0) << ','
        << row.distinct << '\n';
  }
  out << "# miss_rate=" << format_double(result.miss_rate) << '\n';
  out << "# median_stop_r=" << format_double(result.median_stop) << '\n';
}

void write_verify_report(const VerifyResult& result, std::ostream& out) {
  out << "estimator-mean closed form vs exact enumeration: max |dev| = "
      << format_double(result.expectation_max_deviation) << " (tol "
      << format_double(kExpectationTolerance) << "): "
      << (result.expectation_pass ? "PASS" : "FAIL") << '\n';
  out << "cardinality unbiasedness vs exact enumeration:   max |dev| = "
      << format_double(result.cardinality_max_deviation) << " (tol "
      << format_double(kCardinalityTolerance) << "): "
      << (result.cardinality_pass ? "PASS" : "FAIL") << '\n';
  out << "two-session estimator bias at n=46, p=0.9: "
      << format_double(result.bias_at_reference) << " (< 0.01)\n";
  out << "minimum population for bias below 1% at p<=0.9: "
      << result.min_tags_for_percent_bias << '\n';
}

namespace {

ExperimentConfig preset_base() {
  ExperimentConfig config;
  config.n_tags = 500;
  config.trials = 1000;
  config.seed = 1;
  config.r_min = 2;
  config.r_max = 12;
  return config;
}

}  // namespace

std::optional<Preset> find_preset(std::string_view name) {
  if (name == "fig2" || name == "fig4") {
    ExperimentConfig config = preset_base();
    config.error_probability = 0.2;
    config.correlation = 0.0;
    return Preset{std::string(name), "simulate", {config}};
  }
  if (name == "fig5") {
    ExperimentConfig config = preset_base();
    config.error_probability = 0.2;
    config.correlation = 0.3;
    config.estimators = {Estimator::Regm, Estimator::Schnabel};
    return Preset{std::string(name), "correlated", {config}};
  }
  if (name == "fig6") {
    ExperimentConfig low = preset_base();
    low.error_probability = 0.2;
    low.correlation = 0.1;
    low.estimators = {Estimator::Regm, Estimator::Schnabel};
    ExperimentConfig high = low;
    high.correlation = 0.3;
    return Preset{std::string(name), "correlated", {low, high}};
  }
  if (name == "fig7") {
    ExperimentConfig low = preset_base();
    low.error_probability = 0.1;
    low.correlation = 0.3;
    low.estimators = {Estimator::Regm, Estimator::Schnabel};
    ExperimentConfig high = low;
    high.error_probability = 0.2;
    return Preset{std::string(name), "correlated", {low, high}};
  }
  if (name == "stop-p01" || name == "stop-p02") {
    ExperimentConfig config = preset_base();
    config.error_probability = name == "stop-p01" ? 0.1 : 0.2;
    config.correlation = 0.0;
    config.estimators = {Estimator::Regm};
    config.policy.threshold = 1e-5;
    config.policy.margin_sessions = 0;
    return Preset{std::string(name), "stop", {config}};
  }
  return std::nullopt;
}

std::vector<std::string> preset_names() {
  return {"fig2", "fig4", "fig5", "fig6", "fig7", "stop-p01", "stop-p02"};
}

}  // namespace mtag
