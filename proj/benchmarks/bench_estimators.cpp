#include <benchmark/benchmark.h>

#include "mtag/estimators.hpp"
#include "mtag/oracle.hpp"

namespace {

mtag::MultiplicityVector model_counts(int sessions, double p) {
  mtag::MultiplicityVector kbar;
  kbar.counts.resize(static_cast<std::size_t>(sessions));
  for (int i = 1; i <= sessions; ++i) {
    kbar.counts[static_cast<std::size_t>(i - 1)] =
        500.0 * mtag::expected_multiplicity_fraction(i, sessions, p);
  }
  return kbar;
}

void BM_SolveRme(benchmark::State& state) {
  const int sessions = static_cast<int>(state.range(0));
  const mtag::MultiplicityVector kbar = model_counts(sessions, 0.2);
  const mtag::WindowPair windows = mtag::rme_windows(kbar);
  for (auto _ : state) {
    benchmark::DoNotOptimize(mtag::solve_error_probability(kbar, windows));
  }
}
BENCHMARK(BM_SolveRme)->Arg(4)->Arg(12)->Arg(32)->Arg(64);

void BM_SolveRegm(benchmark::State& state) {
  const int sessions = static_cast<int>(state.range(0));
  const mtag::MultiplicityVector kbar = model_counts(sessions, 0.2);
  const mtag::WindowPair windows = mtag::regm_windows(kbar);
  for (auto _ : state) {
    benchmark::DoNotOptimize(mtag::solve_error_probability(kbar, windows));
  }
}
BENCHMARK(BM_SolveRegm)->Arg(4)->Arg(12)->Arg(32)->Arg(64);

void BM_SchnabelEstimate(benchmark::State& state) {
  mtag::SchnabelTallies tallies;
  for (int i = 0; i < 12; ++i) {
    tallies.reads.push_back(400);
    tallies.recaptures.push_back(i == 0 ? 0 : 320);
    tallies.seen_before.push_back(i == 0 ? 0 : 450);
  }
  for (auto _ : state) {
    const auto n = mtag::schnabel_cardinality(tallies);
    benchmark::DoNotOptimize(mtag::schnabel_error_probability(tallies, n));
  }
}
BENCHMARK(BM_SchnabelEstimate);

void BM_ExactEnumeration(benchmark::State& state) {
  const std::int64_t n_tags = state.range(0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(mtag::exact_expected_error_estimate(n_tags, 0.3));
  }
}
BENCHMARK(BM_ExactEnumeration)->Arg(6)->Arg(12);

}  // namespace
