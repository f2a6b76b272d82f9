#include <benchmark/benchmark.h>

#include "kserver/dualcert.hpp"
#include "kserver/strategies.hpp"

namespace kserver {
namespace {

void BM_Run(benchmark::State& state, StrategySpec spec) {
  const auto length = static_cast<std::size_t>(state.range(0));
  const auto k = static_cast<std::size_t>(state.range(1));
  const RequestTrace trace = generate_random(4 * k, length, 10, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(run(spec, k, trace, kDefaultSeed, EventLog::CostOnly).total_cost);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(length));
}

BENCHMARK_CAPTURE(BM_Run, lru, StrategySpec{StrategyKind::Lru})->Args({100000, 16})->Args({100000, 1024});
BENCHMARK_CAPTURE(BM_Run, fifo, StrategySpec{StrategyKind::Fifo})->Args({100000, 16})->Args({100000, 1024});
BENCHMARK_CAPTURE(BM_Run, fwf, StrategySpec{StrategyKind::Fwf})->Args({100000, 16})->Args({100000, 1024});
BENCHMARK_CAPTURE(BM_Run, mark, StrategySpec{StrategyKind::Mark})->Args({100000, 16})->Args({100000, 1024});
BENCHMARK_CAPTURE(BM_Run, balance, StrategySpec{StrategyKind::Balance})->Args({100000, 16})->Args({100000, 1024});
BENCHMARK_CAPTURE(BM_Run, greedydual, StrategySpec{StrategyKind::GreedyDual})
    ->Args({100000, 16})
    ->Args({100000, 1024});

void BM_Certified(benchmark::State& state) {
  const auto length = static_cast<std::size_t>(state.range(0));
  const auto k = static_cast<std::size_t>(state.range(1));
  const RequestTrace trace = generate_random(4 * k, length, 10, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_greedydual_certified(k, trace).result.total_cost);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(length));
}
BENCHMARK(BM_Certified)->Args({100000, 16})->Args({100000, 1024});

void BM_FeasibilityFast(benchmark::State& state) {
  const auto length = static_cast<std::size_t>(state.range(0));
  const RequestTrace trace = generate_random(64, length, 10, 3);
  const CertifiedRun run = run_greedydual_certified(16, trace);
  for (auto _ : state) benchmark::DoNotOptimize(check_feasibility_fast(run.dual, trace).size());
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(length));
}
BENCHMARK(BM_FeasibilityFast)->Arg(100000);

void BM_FeasibilityExhaustive(benchmark::State& state) {
  const auto length = static_cast<std::size_t>(state.range(0));
  const RequestTrace trace = generate_random(64, length, 10, 3);
  const CertifiedRun run = run_greedydual_certified(16, trace);
  for (auto _ : state) benchmark::DoNotOptimize(check_feasibility(run.dual, trace).size());
}
BENCHMARK(BM_FeasibilityExhaustive)->Arg(2000);

}  // namespace
}  // namespace kserver
