#include <random>

#include <benchmark/benchmark.h>

#include "cdlab/analysis.hpp"
#include "cdlab/atomic_model.hpp"
#include "cdlab/bergman.hpp"
#include "cdlab/geometry.hpp"
#include "cdlab/intertwiner.hpp"

using namespace cdlab;

namespace {

ModelSpec coupled(double valency, std::size_t n, std::size_t trunc) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ModelSpec s = ModelSpec::make(1.0, valency, n, trunc);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) s.mu(i, j) = cplx(u(rng), u(rng));
  }
  return s;
}

void BM_AtomProduct(benchmark::State& state) {
  const auto N = static_cast<std::size_t>(state.range(0));
  const TruncatedOperator a = build_atom(1.5, N);
  const TruncatedOperator c = build_connector(1.5, 3.5, 0, N);
  for (auto _ : state) benchmark::DoNotOptimize(a * c);
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_AtomProduct)->RangeMultiplier(4)->Range(256, 16384)->Complexity();

void BM_Assemble(benchmark::State& state) {
  const ModelSpec s = coupled(2.0, static_cast<std::size_t>(state.range(0)), 1024);
  for (auto _ : state) benchmark::DoNotOptimize(assemble(s));
}
BENCHMARK(BM_Assemble)->DenseRange(2, 6, 2);

void BM_SylvesterClosed(benchmark::State& state) {
  const auto N = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(solve_sylvester_closed(1.0, 5.0, 1, N));
}
BENCHMARK(BM_SylvesterClosed)->RangeMultiplier(4)->Range(256, 4096);

void BM_SimilarityReduce(benchmark::State& state) {
  const ModelSpec s = coupled(2.5, static_cast<std::size_t>(state.range(0)), 512);
  for (auto _ : state) benchmark::DoNotOptimize(similarity_reduce(s));
}
BENCHMARK(BM_SimilarityReduce)->DenseRange(2, 4)->Unit(benchmark::kMillisecond);

void BM_OperatorNorm(benchmark::State& state) {
  const TruncatedOperator t = assemble(coupled(2.0, 3, static_cast<std::size_t>(state.range(0))));
  for (auto _ : state) benchmark::DoNotOptimize(operator_norm(t));
}
BENCHMARK(BM_OperatorNorm)->RangeMultiplier(4)->Range(256, 4096)->Unit(benchmark::kMillisecond);

void BM_PowerTrace(benchmark::State& state) {
  const TruncatedOperator t = build_atom(0.5, 2048);
  for (auto _ : state) benchmark::DoNotOptimize(power_trace(t, static_cast<std::size_t>(state.range(0))));
}
BENCHMARK(BM_PowerTrace)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_GeometryReport(benchmark::State& state) {
  const ModelSpec s = coupled(2.0, 3, 512);
  const DiscGrid grid = DiscGrid::default_grid();
  for (auto _ : state) benchmark::DoNotOptimize(geometry_report(s, grid, true));
}
BENCHMARK(BM_GeometryReport)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
