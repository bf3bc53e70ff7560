#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#ifndef MTAG_CLI_PATH
#error "MTAG_CLI_PATH must point at the built CLI binary"
#endif

namespace {

namespace fs = std::filesystem;

struct CommandResult {
  int exit_code = -1;
  std::string output;
};

std::string scratch_path(const std::string& name) {
  return (fs::temp_directory_path() / ("mtag_test_" + name)).string();
}

std::string read_file(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  std::ostringstream content;
  content << file.rdbuf();
  return content.str();
}

// Runs the CLI through the shell, capturing combined stdout/stderr and the
// exit code. `prefix` may set environment variables.
CommandResult run_cli(const std::string& args, const std::string& prefix = {}) {
  const std::string capture = scratch_path("capture.txt");
  const std::string command = prefix + MTAG_CLI_PATH " " + args + " > " +
                              capture + " 2>&1";
  const int status = std::system(command.c_str());
  CommandResult result;
  result.exit_code = WEXITSTATUS(status);
  result.output = read_file(capture);
  std::remove(capture.c_str());
  return result;
}

}  // namespace

TEST_CASE("verify succeeds and reports both checks") {
  const CommandResult result = run_cli("verify");
  CHECK(result.exit_code == 0);
  CHECK(result.output.find("PASS") != std::string::npos);
  CHECK(result.output.find("minimum population") != std::string::npos);
}

TEST_CASE("simulate writes a reproducible CSV file") {
  const std::string out = scratch_path("sim.csv");
  const std::string args =
      "simulate --n 100 --p 0.2 --trials 4 --r-max 4 --seed 5 --out " + out;
  const CommandResult first = run_cli(args);
  CHECK(first.exit_code == 0);
  CHECK(first.output.find("wrote") != std::string::npos);
  const std::string first_bytes = read_file(out);
  CHECK(first_bytes.find(
            "estimator,R,mean_p_hat,mean_n_hat,mse_n,mean_p_m,trials,seed") !=
        std::string::npos);
  CHECK(first_bytes.find("# rng=mt19937_64 seed=5") != std::string::npos);

  const CommandResult second = run_cli(args);
  CHECK(second.exit_code == 0);
  CHECK(read_file(out) == first_bytes);
  std::remove(out.c_str());
}

TEST_CASE("flags override preset parameters") {
  const std::string out = scratch_path("preset.csv");
  const CommandResult result = run_cli(
      "simulate --preset fig2 --trials 2 --r-max 3 --out " + out);
  CHECK(result.exit_code == 0);
  const std::string bytes = read_file(out);
  CHECK(bytes.find("trials=2") != std::string::npos);
  CHECK(bytes.find("n=500") != std::string::npos);
  std::remove(out.c_str());
}

TEST_CASE("stop emits per-trial rows and a summary") {
  const std::string out = scratch_path("stop.csv");
  const CommandResult result = run_cli(
      "stop --n 100 --p 0 --trials 3 --seed 2 --out " + out);
  CHECK(result.exit_code == 0);
  const std::string bytes = read_file(out);
  CHECK(bytes.find("trial,stop_r,cap_reached,missed,distinct") !=
        std::string::npos);
  CHECK(bytes.find("0,2,0,0,100") != std::string::npos);
  CHECK(bytes.find("# miss_rate=0\n") != std::string::npos);
  std::remove(out.c_str());
}

TEST_CASE("correlated stop runs default to a two-session margin") {
  const std::string out = scratch_path("margin.csv");
  const CommandResult result = run_cli(
      "stop --n 50 --p 0 --rho 0.3 --trials 2 --out " + out);
  CHECK(result.exit_code == 0);
  const std::string bytes = read_file(out);
  CHECK(bytes.find("margin=2") != std::string::npos);
  CHECK(bytes.find("0,4,0,0,50") != std::string::npos);
  std::remove(out.c_str());
}

TEST_CASE("two-session estimator is limited to two-session sweeps") {
  const CommandResult bad = run_cli(
      "simulate --estimator two-session --trials 1 --r-max 4");
  CHECK(bad.exit_code == 2);
  CHECK(bad.output.find("two-session") != std::string::npos);

  const CommandResult good = run_cli(
      "simulate --estimator two-session --trials 1 --r-min 2 --r-max 2 "
      "--p 0 --n 20");
  CHECK(good.exit_code == 0);
  CHECK(good.output.find("two-session,2,0,20,0,0,1,1") != std::string::npos);
}

TEST_CASE("correlated rejects an independent configuration") {
  const CommandResult result = run_cli("correlated --rho 0 --trials 2");
  CHECK(result.exit_code == 2);
  CHECK(result.output.find("rho") != std::string::npos);
  CHECK(result.output.find("simulate") != std::string::npos);
}

TEST_CASE("simulate rejects a correlated configuration") {
  const CommandResult result = run_cli("simulate --rho 0.3 --trials 2");
  CHECK(result.exit_code == 2);
  CHECK(result.output.find("correlated") != std::string::npos);
}

TEST_CASE("invalid flags, presets and estimators exit with code 2") {
  CHECK(run_cli("simulate --frobnicate").exit_code == 2);
  CHECK(run_cli("").exit_code == 2);

  const CommandResult preset = run_cli("simulate --preset fig9 --trials 1");
  CHECK(preset.exit_code == 2);
  CHECK(preset.output.find("fig9") != std::string::npos);

  const CommandResult wrong_cmd = run_cli("simulate --preset fig5 --trials 1");
  CHECK(wrong_cmd.exit_code == 2);
  CHECK(wrong_cmd.output.find("correlated") != std::string::npos);

  const CommandResult estimator =
      run_cli("simulate --estimator laplace --trials 1");
  CHECK(estimator.exit_code == 2);
  CHECK(estimator.output.find("laplace") != std::string::npos);

  const CommandResult trials = run_cli("simulate --trials 0");
  CHECK(trials.exit_code == 2);
  CHECK(trials.output.find("trials") != std::string::npos);
}

TEST_CASE("unwritable output paths are reported") {
  const CommandResult result = run_cli(
      "simulate --trials 1 --r-max 2 --out /nonexistent-dir/out.csv");
  CHECK(result.exit_code == 2);
  CHECK(result.output.find("/nonexistent-dir/out.csv") != std::string::npos);
}

TEST_CASE("environment variables feed option values") {
  const std::string out = scratch_path("env.csv");
  const CommandResult result = run_cli(
      "simulate --n 100 --r-max 3 --out " + out, "MTAG_TRIALS=2 ");
  CHECK(result.exit_code == 0);
  CHECK(read_file(out).find("trials=2") != std::string::npos);
  std::remove(out.c_str());
}

TEST_CASE("config files feed option values and flags win") {
  const std::string cfg = scratch_path("opts.conf");
  {
    std::ofstream file(cfg);
    file << "n=150\ntrials=2\nr-max=3\n";
  }
  const std::string out = scratch_path("cfg.csv");
  const CommandResult from_file = run_cli(
      "simulate --config " + cfg + " --out " + out);
  CHECK(from_file.exit_code == 0);
  CHECK(read_file(out).find("n=150") != std::string::npos);

  const CommandResult overridden = run_cli(
      "simulate --config " + cfg + " --n 80 --out " + out);
  CHECK(overridden.exit_code == 0);
  CHECK(read_file(out).find("n=80") != std::string::npos);
  std::remove(cfg.c_str());
  std::remove(out.c_str());
}

TEST_CASE("list-presets names every preset") {
  const CommandResult result = run_cli("list-presets");
  CHECK(result.exit_code == 0);
  CHECK(result.output.find("fig2") != std::string::npos);
  CHECK(result.output.find("stop-p02") != std::string::npos);
}
