// Serial reference vs OpenMP sweep over sample points.

#include <benchmark/benchmark.h>

#include <cmath>

#include "gnb/scenario.hpp"
#include "gnb/submanifold.hpp"

using namespace gnb;

namespace {

VectorField swirl(int n) {
  return VectorField::from(n, [n](auto x, auto y) {
    using std::cos, std::sin;
    for (int i = 0; i < n; ++i) y[i] = 0.4 * sin(1.3 * x[(i + 1) % n]) + 0.3 * cos(x[i]);
  });
}

void sweep(benchmark::State& state, Execution exec) {
  const auto M = manifolds::perturbed(3);
  const auto gen = random_polynomial_family(2024);
  const auto u = swirl(3);
  const auto pts = sample_points(M, {static_cast<std::size_t>(state.range(0)), 7, 0.1});
  for (auto _ : state) benchmark::DoNotOptimize(totally_geodesic_test(M, gen, u, pts, {}, exec).max_sff);
  state.SetItemsProcessed(state.iterations() * state.range(0));
  state.counters["threads"] = exec == Execution::parallel ? max_threads() : 1;
}

void scenario(benchmark::State& state, Execution exec) {
  const auto sc = load_scenario("preset:oracle_equivalence_sweep");
  for (auto _ : state) benchmark::DoNotOptimize(run_scenario(sc, {exec, "bench"}).pass);
}

}  // namespace

BENCHMARK_CAPTURE(sweep, serial, Execution::serial)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(sweep, parallel, Execution::parallel)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK_CAPTURE(scenario, serial, Execution::serial)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(scenario, parallel, Execution::parallel)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
