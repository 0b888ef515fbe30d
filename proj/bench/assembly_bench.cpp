#include <benchmark/benchmark.h>

#include <cmath>

#include "virecon/assembly.hpp"
#include "virecon/estimators.hpp"

using namespace virecon;

namespace {

SpacePtr bench_space(int n, int k) {
  return build_space(std::make_shared<const Mesh>(build_structured_mesh(n)), k);
}

double smooth(double x, double y, double) { return std::sin(3.0 * x) * std::cos(2.0 * y) + x * y; }

// Arguments: grid size n, degree k.
void grid_args(benchmark::internal::Benchmark* b) {
  for (int k : {1, 2})
    for (int n : {32, 64, 128}) b->Args({n, k});
}

// Arguments: grid size n, degree k, threads.
void thread_args(benchmark::internal::Benchmark* b) {
  for (int k : {1, 2})
    for (int n : {64, 128})
      for (int t : {1, 2, 4}) b->Args({n, k, t});
}

void BM_StiffnessReference(benchmark::State& state) {
  const auto space = bench_space(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(reference::assemble_stiffness(*space));
  state.counters["dofs"] = static_cast<double>(space->num_dofs());
}

void BM_StiffnessParallel(benchmark::State& state) {
  const auto space = bench_space(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  set_num_threads(static_cast<int>(state.range(2)));
  for (auto _ : state) benchmark::DoNotOptimize(assemble_stiffness(*space));
  set_num_threads(1);
  state.counters["dofs"] = static_cast<double>(space->num_dofs());
}

void BM_MassReference(benchmark::State& state) {
  const auto space = bench_space(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(reference::assemble_mass(*space));
}

void BM_MassParallel(benchmark::State& state) {
  const auto space = bench_space(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  set_num_threads(static_cast<int>(state.range(2)));
  for (auto _ : state) benchmark::DoNotOptimize(assemble_mass(*space));
  set_num_threads(1);
}

void BM_LoadReference(benchmark::State& state) {
  const auto space = bench_space(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(reference::assemble_load(*space, smooth, 0.0));
}

void BM_LoadParallel(benchmark::State& state) {
  const auto space = bench_space(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  set_num_threads(static_cast<int>(state.range(2)));
  for (auto _ : state) benchmark::DoNotOptimize(assemble_load(*space, smooth, 0.0));
  set_num_threads(1);
}

void BM_Eta0(benchmark::State& state) {
  const auto space = bench_space(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  const auto w = interpolate(space, smooth, 0.0);
  const FeFunction z(space);
  set_num_threads(static_cast<int>(state.range(2)));
  for (auto _ : state) benchmark::DoNotOptimize(eta0(w, z, z, smooth, 0.0));
  set_num_threads(1);
}

}  // namespace

BENCHMARK(BM_StiffnessReference)->Apply(grid_args)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_StiffnessParallel)->Apply(thread_args)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MassReference)->Apply(grid_args)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MassParallel)->Apply(thread_args)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LoadReference)->Apply(grid_args)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LoadParallel)->Apply(thread_args)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Eta0)->Apply(thread_args)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
