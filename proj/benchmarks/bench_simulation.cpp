#include <benchmark/benchmark.h>

#include "mtag/controller.hpp"
#include "mtag/session_sim.hpp"

namespace {

void BM_SimulateAndTally(benchmark::State& state) {
  const std::int64_t n_tags = state.range(0);
  std::uint64_t seed = 1;
  for (auto _ : state) {
    const mtag::ReadHistory history =
        mtag::simulate_independent({n_tags, 0.2}, 8, seed++);
    benchmark::DoNotOptimize(mtag::tally(history));
  }
  state.SetItemsProcessed(state.iterations() * n_tags * 8);
}
BENCHMARK(BM_SimulateAndTally)->Arg(500)->Arg(5000)->Arg(50000);

void BM_CorrelatedSession(benchmark::State& state) {
  const std::int64_t n_tags = state.range(0);
  mtag::CorrelatedSessionSource source(mtag::derive_correlation(0.2, 0.3),
                                       n_tags, 99);
  for (auto _ : state) {
    benchmark::DoNotOptimize(source.next_session());
  }
  state.SetItemsProcessed(state.iterations() * n_tags);
}
BENCHMARK(BM_CorrelatedSession)->Arg(500)->Arg(50000);

void BM_SequentialRun(benchmark::State& state) {
  std::uint64_t seed = 1;
  mtag::StopPolicy policy;
  for (auto _ : state) {
    mtag::IndependentSessionSource source({500, 0.1}, seed++);
    benchmark::DoNotOptimize(
        mtag::run_sequential(source, mtag::Estimator::Regm, policy));
  }
}
BENCHMARK(BM_SequentialRun);

}  // namespace

BENCHMARK_MAIN();
