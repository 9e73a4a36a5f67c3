#include <benchmark/benchmark.h>

#include <cmath>
#include <random>
#include <vector>

#include "crimewave/partition.hpp"
#include "crimewave/random.hpp"
#include "crimewave/significance.hpp"
#include "crimewave/waves.hpp"
#include "crimewave/wavelet.hpp"

using namespace crimewave;

static void BM_Transform(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto grid = build_grid(n);
  Rng rng(1);
  const auto y = ar1_series(n, 0.5, 1.0, rng);
  for (auto _ : state) benchmark::DoNotOptimize(transform(y, grid));
  state.SetLabel(std::to_string(grid.size()) + " scales");
}
BENCHMARK(BM_Transform)->Arg(260)->Arg(520)->Arg(1040)->Unit(benchmark::kMillisecond);

static void BM_GlobalSpectrum(benchmark::State& state) {
  const auto grid = build_grid(520);
  Rng rng(2);
  const auto w = transform(ar1_series(520, 0.5, 1.0, rng), grid);
  for (auto _ : state) benchmark::DoNotOptimize(global_spectrum(w));
}
BENCHMARK(BM_GlobalSpectrum);

static void BM_MonteCarloGlobal(benchmark::State& state) {
  const auto grid = build_grid(520);
  MonteCarloOptions opts;
  opts.replicates = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(montecarlo_global_threshold(0.5, 1.0, grid, opts));
}
BENCHMARK(BM_MonteCarloGlobal)->Arg(100)->Unit(benchmark::kMillisecond);

static void BM_FitDurations(benchmark::State& state) {
  Rng rng(3);
  std::weibull_distribution<double> hold(0.6, 40.0);
  std::vector<std::int64_t> samples(static_cast<std::size_t>(state.range(0)));
  for (auto& s : samples) s = static_cast<std::int64_t>(std::ceil(hold(rng)));
  for (auto _ : state) benchmark::DoNotOptimize(fit_durations(samples));
}
BENCHMARK(BM_FitDurations)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

static void BM_Split(benchmark::State& state) {
  Rng rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<WeightedPoint> pts;
  for (int i = 0; i < 10000; ++i) pts.push_back({u(rng), u(rng), 1.0 + 99.0 * u(rng)});
  const auto w = PopulationWeights::from_points(pts);
  for (auto _ : state) benchmark::DoNotOptimize(split(w, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_Split)->Arg(64)->Arg(256)->Unit(benchmark::kMicrosecond);
BENCHMARK_MAIN();
