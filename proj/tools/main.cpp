// Experiment CLI: reader-session sweeps, sequential-stop runs and exact
// verification for the multi-session tag inventory estimators.
//
// Exit codes: 0 success, 1 verification failure, 2 invalid configuration.

#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mtag/experiments.hpp"

namespace {

struct Flags {
  std::string preset;
  std::int64_t n_tags = 500;
  double p = 0.2;
  double rho = 0.0;
  int trials = 1000;
  std::uint64_t seed = 1;
  std::vector<std::string> estimators;
  int r_min = 2;
  int r_max = 12;
  double threshold = 1e-5;
  int margin = -1;  // -1: pick by mode (0 independent, 2 correlated)
  double bias = 0.0;
  int max_sessions = 64;
  std::string out;
};

// All options live on the root app (subcommands fall through to it), so a
// flat key=value config file and the MTAG_* environment variables cover
// every flag uniformly.
void add_options(CLI::App& app, Flags& flags) {
  app.set_config("--config", "", "Read options from a key=value file");
  app.add_option("--preset", flags.preset,
                 "Named parameter set (see `mtag list-presets`)")
      ->envname("MTAG_PRESET");
  app.add_option("--n", flags.n_tags, "Population size")->envname("MTAG_N");
  app.add_option("--p", flags.p, "Per-session tag error probability")
      ->envname("MTAG_P");
  app.add_option("--rho", flags.rho, "Session-to-session error correlation")
      ->envname("MTAG_RHO");
  app.add_option("--trials", flags.trials, "Number of repeated experiments")
      ->envname("MTAG_TRIALS");
  app.add_option("--seed", flags.seed, "Base seed; trial t uses seed + t")
      ->envname("MTAG_SEED");
  app.add_option("--estimator", flags.estimators,
                 "Estimator (repeatable): two-session, rme, regm, schnabel")
      ->envname("MTAG_ESTIMATOR");
  app.add_option("--r-min", flags.r_min, "First session count to report")
      ->envname("MTAG_R_MIN");
  app.add_option("--r-max", flags.r_max, "Last session count to report")
      ->envname("MTAG_R_MAX");
  app.add_option("--threshold", flags.threshold,
                 "Missing-tag probability below which reading stops")
      ->envname("MTAG_THRESHOLD");
  app.add_option("--margin", flags.margin,
                 "Extra sessions after the stop criterion is met")
      ->envname("MTAG_MARGIN");
  app.add_option("--bias", flags.bias,
                 "Additive bias applied to the estimated missing-tag "
                 "probability before the threshold test")
      ->envname("MTAG_BIAS");
  app.add_option("--max-sessions", flags.max_sessions,
                 "Unconditional session cap")
      ->envname("MTAG_MAX_SESSIONS");
  app.add_option("--out", flags.out, "Output file (default: stdout)")
      ->envname("MTAG_OUT");
}

bool option_set(CLI::App& app, const std::string& name) {
  const CLI::Option* option = app.get_option_no_throw(name);
  return option != nullptr && option->count() > 0;
}

std::vector<mtag::Estimator> parse_estimators(
    const std::vector<std::string>& names) {
  std::vector<mtag::Estimator> out;
  for (const std::string& name : names) {
    const auto estimator = mtag::parse_estimator(name);
    if (!estimator.has_value()) {
      throw std::invalid_argument(
          "unknown estimator '" + name +
          "'; valid names: two-session, rme, regm, schnabel");
    }
    out.push_back(*estimator);
  }
  return out;
}

// Preset (if any) supplies the blocks; explicitly set flags or config-file
// values then override every block.
std::vector<mtag::ExperimentConfig> build_blocks(CLI::App& app,
                                                 const Flags& flags,
                                                 const std::string& command) {
  std::vector<mtag::ExperimentConfig> blocks;
  if (!flags.preset.empty()) {
    const auto preset = mtag::find_preset(flags.preset);
    if (!preset.has_value()) {
      throw std::invalid_argument("unknown preset '" + flags.preset + "'");
    }
    if (preset->command != command) {
      throw std::invalid_argument("preset '" + flags.preset +
                                  "' belongs to the " + preset->command +
                                  " subcommand");
    }
    blocks = preset->blocks;
  } else {
    blocks.push_back(mtag::ExperimentConfig{});
    blocks.back().error_probability = flags.p;
    blocks.back().correlation = flags.rho;
  }

  for (mtag::ExperimentConfig& config : blocks) {
    if (option_set(app, "--n")) config.n_tags = flags.n_tags;
    if (option_set(app, "--p")) config.error_probability = flags.p;
    if (option_set(app, "--rho")) config.correlation = flags.rho;
    if (option_set(app, "--trials")) config.trials = flags.trials;
    if (option_set(app, "--seed")) config.seed = flags.seed;
    if (option_set(app, "--estimator")) {
      config.estimators = parse_estimators(flags.estimators);
    }
    if (option_set(app, "--r-min")) config.r_min = flags.r_min;
    if (option_set(app, "--r-max")) config.r_max = flags.r_max;
    if (option_set(app, "--threshold")) {
      config.policy.threshold = flags.threshold;
    }
    if (option_set(app, "--bias")) config.policy.bias_addend = flags.bias;
    if (option_set(app, "--max-sessions")) {
      config.policy.max_sessions = flags.max_sessions;
    }
    if (option_set(app, "--margin")) {
      config.policy.margin_sessions = flags.margin;
    } else if (flags.preset.empty()) {
      config.policy.margin_sessions = config.correlation > 0.0 ? 2 : 0;
    }
  }
  return blocks;
}

int write_output(const std::string& path,
                 const std::function<void(std::ostream&)>& writer,
                 const std::function<void()>& summary) {
  if (path.empty()) {
    writer(std::cout);
    return 0;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) {
    std::cerr << "cannot open output file: " << path << '\n';
    return 2;
  }
  writer(file);
  file.flush();
  if (!file) {
    std::cerr << "failed while writing output file: " << path << '\n';
    return 2;
  }
  summary();
  return 0;
}

int run_sweep_command(CLI::App& app, const Flags& flags,
                      const std::string& command) {
  auto blocks = build_blocks(app, flags, command);
  for (const mtag::ExperimentConfig& config : blocks) {
    if (command == "simulate" && config.correlation != 0.0) {
      throw std::invalid_argument(
          "rho must be 0 for simulate; use the correlated subcommand for "
          "dependent sessions");
    }
    if (command == "correlated" && config.correlation <= 0.0) {
      throw std::invalid_argument(
          "rho must be positive for correlated; use the simulate subcommand "
          "for independent sessions");
    }
    mtag::validate(config);
  }

  std::vector<mtag::SweepResult> results;
  results.reserve(blocks.size());
  for (const mtag::ExperimentConfig& config : blocks) {
    results.push_back(mtag::run_sweep(config));
  }

  return write_output(
      flags.out,
      [&](std::ostream& out) { mtag::write_sweep_csv(results, command, out); },
      [&] {
        std::size_t rows = 0;
        for (const auto& result : results) rows += result.points.size();
        std::cout << "wrote " << rows << " data rows to " << flags.out << '\n';
      });
}

int run_stop_command(CLI::App& app, const Flags& flags) {
  auto blocks = build_blocks(app, flags, "stop");
  if (blocks.size() != 1) {
    throw std::invalid_argument("stop presets expand to exactly one block");
  }
  mtag::ExperimentConfig config = blocks.front();
  if (!option_set(app, "--estimator") && flags.preset.empty()) {
    config.estimators = {mtag::Estimator::Regm};
  }
  if (config.estimators.size() != 1) {
    throw std::invalid_argument(
        "stop uses exactly one estimator; pass a single --estimator");
  }
  const mtag::Estimator estimator = config.estimators.front();
  mtag::validate(config);

  const mtag::StopResult result = mtag::run_stop(config, estimator);
  return write_output(
      flags.out,
      [&](std::ostream& out) { mtag::write_stop_csv(result, out); },
      [&] {
        std::cout << "wrote " << result.trials.size() << " trials to "
                  << flags.out << "; median stop R = "
                  << mtag::format_double(result.median_stop)
                  << ", miss rate = "
                  << mtag::format_double(result.miss_rate) << '\n';
      });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mtag - missing-tag estimation from repeated reader sessions"};
  app.require_subcommand(1);

  Flags flags;
  add_options(app, flags);

  CLI::App* simulate = app.add_subcommand(
      "simulate", "Independent-session estimator sweep (CSV)");
  CLI::App* correlated = app.add_subcommand(
      "correlated", "Correlated-session estimator sweep (CSV)");
  CLI::App* stop = app.add_subcommand(
      "stop", "Sequential stopping-rule experiment (CSV)");
  CLI::App* verify = app.add_subcommand(
      "verify", "Exact enumeration checks of the two-session estimators");
  CLI::App* list_presets =
      app.add_subcommand("list-presets", "List named parameter sets");
  for (CLI::App* sub : {simulate, correlated, stop, verify, list_presets}) {
    sub->fallthrough();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (simulate->parsed()) {
      return run_sweep_command(app, flags, "simulate");
    }
    if (correlated->parsed()) {
      return run_sweep_command(app, flags, "correlated");
    }
    if (stop->parsed()) {
      return run_stop_command(app, flags);
    }
    if (verify->parsed()) {
      const mtag::VerifyResult result = mtag::run_verify();
      const int written = write_output(
          flags.out,
          [&](std::ostream& out) { mtag::write_verify_report(result, out); },
          [&] {
            std::cout << "wrote verification report to " << flags.out << '\n';
          });
      if (written != 0) return written;
      return result.pass() ? 0 : 1;
    }
    if (list_presets->parsed()) {
      for (const std::string& name : mtag::preset_names()) {
        std::cout << name << '\n';
      }
      return 0;
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid config: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
