#include <benchmark/benchmark.h>

#include <vector>

#include "ifl/kernels.hpp"
#include "ifl/rng.hpp"

namespace {

ifl::Dataset random_dataset(std::size_t n, std::size_t d) {
  ifl::rng::Engine e(7);
  ifl::Dataset ds{"readings", {}};
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> x(d);
    for (auto& v : x) v = ifl::rng::uniform(e, -1, 1);
    ds.samples.push_back(ifl::Sample{static_cast<std::int64_t>(i), x, ifl::rng::uniform(e, -1, 1), {}});
  }
  return ds;
}

std::vector<ifl::ModelParams> random_models(std::size_t m, std::size_t d) {
  ifl::rng::Engine e(11);
  std::vector<ifl::ModelParams> out;
  for (std::size_t i = 0; i < m; ++i) {
    ifl::ModelParams p{std::vector<double>(d), ifl::rng::uniform(e, -1, 1), 0};
    for (auto& w : p.weights) w = ifl::rng::uniform(e, -1, 1);
    out.push_back(p);
  }
  return out;
}

void BM_GradientSerial(benchmark::State& state) {
  const auto m = ifl::kernels::to_design_matrix(random_dataset(static_cast<std::size_t>(state.range(0)), 8));
  const std::vector<double> w(8, 0.1);
  for (auto _ : state) benchmark::DoNotOptimize(ifl::kernels::serial::loss_and_gradient(w, 0.2, m));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_GradientParallel(benchmark::State& state) {
  const auto m = ifl::kernels::to_design_matrix(random_dataset(static_cast<std::size_t>(state.range(0)), 8));
  const std::vector<double> w(8, 0.1);
  const int threads = static_cast<int>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(ifl::kernels::parallel::loss_and_gradient(w, 0.2, m, threads));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_DistanceSerial(benchmark::State& state) {
  const auto models = random_models(static_cast<std::size_t>(state.range(0)), 4);
  const auto probe = ifl::kernels::to_design_matrix(random_dataset(256, 4));
  for (auto _ : state) benchmark::DoNotOptimize(ifl::kernels::serial::distance_matrix(models, probe));
}

void BM_DistanceParallel(benchmark::State& state) {
  const auto models = random_models(static_cast<std::size_t>(state.range(0)), 4);
  const auto probe = ifl::kernels::to_design_matrix(random_dataset(256, 4));
  const int threads = static_cast<int>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(ifl::kernels::parallel::distance_matrix(models, probe, threads));
}

}  // namespace

BENCHMARK(BM_GradientSerial)->Arg(1000)->Arg(100000);
BENCHMARK(BM_GradientParallel)->Args({1000, 2})->Args({100000, 2})->Args({100000, 4});
BENCHMARK(BM_DistanceSerial)->Arg(16)->Arg(64);
BENCHMARK(BM_DistanceParallel)->Args({16, 2})->Args({64, 2})->Args({64, 4});

BENCHMARK_MAIN();
