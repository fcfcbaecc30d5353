// Serial reference vs OpenMP kernels on feature-map and image-sized inputs.
#include <random>

#include <benchmark/benchmark.h>

#include "medxplain/kernels.hpp"

using namespace medxplain;

namespace {

Tensor3 stack(std::size_t k, std::size_t side) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Tensor3 t(k, side, side);
  for (double& v : t.values()) v = u(rng);
  return t;
}

GridD grid(std::size_t side) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  GridD g(side, side);
  for (double& v : g.values()) v = u(rng);
  return g;
}

template <auto Fn>
void channel_means(benchmark::State& state) {
  const Tensor3 t = stack(static_cast<std::size_t>(state.range(0)), 24);
  for (auto _ : state) benchmark::DoNotOptimize(Fn(t));
}

template <auto Fn>
void weighted_relu_sum(benchmark::State& state) {
  const auto k = static_cast<std::size_t>(state.range(0));
  const Tensor3 t = stack(k, 24);
  const std::vector<double> w(k, 0.01);
  for (auto _ : state) benchmark::DoNotOptimize(Fn(t, w));
}

template <auto Fn>
void bilinear_resize(benchmark::State& state) {
  const GridD g = grid(24);
  const auto side = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(Fn(g, side, side));
}

template <auto Fn>
void threshold_strict(benchmark::State& state) {
  const GridD g = grid(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(Fn(g, 0.25));
}

}  // namespace

BENCHMARK(channel_means<kernels::serial::channel_means>)->Name("channel_means/serial")->Arg(64)->Arg(768);
BENCHMARK(channel_means<kernels::omp::channel_means>)->Name("channel_means/omp")->Arg(64)->Arg(768);
BENCHMARK(weighted_relu_sum<kernels::serial::weighted_relu_sum>)->Name("weighted_relu_sum/serial")->Arg(64)->Arg(768);
BENCHMARK(weighted_relu_sum<kernels::omp::weighted_relu_sum>)->Name("weighted_relu_sum/omp")->Arg(64)->Arg(768);
BENCHMARK(bilinear_resize<kernels::serial::bilinear_resize>)->Name("bilinear_resize/serial")->Arg(224)->Arg(1024);
BENCHMARK(bilinear_resize<kernels::omp::bilinear_resize>)->Name("bilinear_resize/omp")->Arg(224)->Arg(1024);
BENCHMARK(threshold_strict<kernels::serial::threshold_strict>)->Name("threshold_strict/serial")->Arg(224)->Arg(1024);
BENCHMARK(threshold_strict<kernels::omp::threshold_strict>)->Name("threshold_strict/omp")->Arg(224)->Arg(1024);

BENCHMARK_MAIN();
