#include <benchmark/benchmark.h>

#include "aoi/closed_form.hpp"
#include "aoi/mm1_model.hpp"
#include "aoi/queue_sim.hpp"

static void BM_GenericEngine(benchmark::State& state) {
  const aoi::mm1::Mm1Params p{1.0, 0.3, 0.4, static_cast<std::size_t>(state.range(0))};
  for (auto _ : state) benchmark::DoNotOptimize(aoi::mm1::age_blocking(p));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_GenericEngine)->RangeMultiplier(2)->Range(2, 50)->Complexity();

static void BM_Recursion(benchmark::State& state) {
  const aoi::mm1::Mm1Params p{1.0, 0.3, 0.4, static_cast<std::size_t>(state.range(0))};
  for (auto _ : state) benchmark::DoNotOptimize(aoi::mm1::age_blocking_recursive(p));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Recursion)->RangeMultiplier(4)->Range(4, 1024)->Complexity(benchmark::oN);

static void BM_AgeLimit(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(aoi::mm1::age_limit({1.0, 0.45, 0.45, 1}, 1e-9));
}
BENCHMARK(BM_AgeLimit);

static void BM_ClosedForm(benchmark::State& state) {
  double rho_i = 0.1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(aoi::closed_form::average_age_source(1.0, rho_i, 0.3));
    rho_i = rho_i > 0.6 ? 0.1 : rho_i + 1e-3;
  }
}
BENCHMARK(BM_ClosedForm);

static void BM_Simulate(benchmark::State& state) {
  aoi::sim::SimConfig c;
  c.lambdas = {0.25, 0.25};
  c.num_events = static_cast<std::uint64_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(aoi::sim::simulate(c));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Simulate)->Arg(1'000'000)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
