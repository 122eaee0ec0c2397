#include <benchmark/benchmark.h>

#include "jsrcert/bounds.hpp"
#include "jsrcert/cap_geometry.hpp"
#include "jsrcert/certifier.hpp"
#include "jsrcert/lift_algebra.hpp"
#include "jsrcert/sampling.hpp"

using namespace jsrcert;

namespace {

ModeSet parrilo() {
  ModeSet set;
  set.dim = 2;
  Matrix a(2, 2), b(2, 2);
  a << 1, 0, 1, 0;
  b << 0, 1, 0, -1;
  set.matrices = {a, b};
  return set;
}

void BM_DLiftMatrix(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const int d = static_cast<int>(state.range(1));
  Rng rng = make_stream(1, {static_cast<std::uint64_t>(n)});
  Matrix a(n, n);
  for (int i = 0; i < n; ++i) a.col(i) = sample_unit_sphere(n, rng);
  for (auto _ : state) benchmark::DoNotOptimize(d_lift_matrix(a, d));
}
BENCHMARK(BM_DLiftMatrix)->Args({2, 2})->Args({2, 4})->Args({3, 2})->Args({3, 3})->Args({4, 3});

void BM_RegIncBeta(benchmark::State& state) {
  double x = 0.0;
  for (auto _ : state) {
    x += 1e-3;
    if (x >= 1.0) x = 1e-3;
    benchmark::DoNotOptimize(reg_inc_beta(x, 1.5, 0.5));
  }
}
BENCHMARK(BM_RegIncBeta);

void BM_DeltaCap(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(delta_cap(0.01, n));
}
BENCHMARK(BM_DeltaCap)->Arg(2)->Arg(3)->Arg(6);

void BM_SimulateParrilo(benchmark::State& state) {
  const ModeSet m = parrilo();
  for (auto _ : state) benchmark::DoNotOptimize(simulate(m, state.range(0), 1, 7));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SimulateParrilo)->Arg(1000)->Arg(10000);

void BM_SolveGammaParrilo(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const EndpointSet obs = simulate(parrilo(), state.range(1), 1, 5).endpoints();
  const SolveOptions opts;
  for (auto _ : state) benchmark::DoNotOptimize(solve_gamma(obs, d, opts));
}
BENCHMARK(BM_SolveGammaParrilo)->Args({1, 100})->Args({1, 1000})->Args({2, 100})->Args({2, 1000})
    ->Unit(benchmark::kMillisecond);

void BM_JsrUpperBound(benchmark::State& state) {
  ConfidenceBudget b;
  b.samples = 10000;
  b.dim = 2;
  b.degree = 2;
  b.modes = 2;
  b.trace_length = 1;
  for (auto _ : state) benchmark::DoNotOptimize(jsr_upper_bound(1.0, 3.0, 1.5, b));
}
BENCHMARK(BM_JsrUpperBound);

}  // namespace

BENCHMARK_MAIN();
