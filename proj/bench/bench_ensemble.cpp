// Serial reference vs OpenMP ensemble kernels.

#include <benchmark/benchmark.h>

#include "cidpred/simulate.hpp"

using namespace cidpred;

namespace {

Strategy convex() {
  return ConvexStrategy(Measure::uniform(), PartitionScheme::dyadic(), DirichletLike{1.0});
}

Strategy gaussian() { return StableStrategy(2.0, 1.0, GeometricSchedule{0.5}); }

EnsembleOptions options(int M, int N) {
  EnsembleOptions o;
  o.M = M;
  o.N = N;
  o.seed = 1;
  o.pairs = {{1, 2}};
  return o;
}

void BM_convex_serial(benchmark::State& state) {
  const Strategy s = convex();
  const auto o = options(static_cast<int>(state.range(0)), 50);
  for (auto _ : state) benchmark::DoNotOptimize(ensemble_serial(s, o));
  state.SetItemsProcessed(state.iterations() * o.M * o.N);
}

void BM_convex_parallel(benchmark::State& state) {
  const Strategy s = convex();
  const auto o = options(static_cast<int>(state.range(0)), 50);
  for (auto _ : state) benchmark::DoNotOptimize(ensemble(s, o));
  state.SetItemsProcessed(state.iterations() * o.M * o.N);
}

void BM_stable_serial(benchmark::State& state) {
  const Strategy s = gaussian();
  const auto o = options(static_cast<int>(state.range(0)), 20);
  for (auto _ : state) benchmark::DoNotOptimize(ensemble_serial(s, o));
  state.SetItemsProcessed(state.iterations() * o.M * o.N);
}

void BM_stable_parallel(benchmark::State& state) {
  const Strategy s = gaussian();
  const auto o = options(static_cast<int>(state.range(0)), 20);
  for (auto _ : state) benchmark::DoNotOptimize(ensemble(s, o));
  state.SetItemsProcessed(state.iterations() * o.M * o.N);
}

}  // namespace

BENCHMARK(BM_convex_serial)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_convex_parallel)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_stable_serial)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_stable_parallel)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
