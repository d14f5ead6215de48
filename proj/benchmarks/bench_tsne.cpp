#include <benchmark/benchmark.h>

#include "facespace/affinity.hpp"
#include "facespace/gradient.hpp"
#include "facespace/rng.hpp"

using namespace facespace;

namespace {

RowMatrix unit_rows(std::size_t n, std::size_t dim) {
  Rng rng(1);
  RowMatrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
  x.rowwise().normalize();
  return x;
}

Layout random_layout(std::size_t n) {
  Rng rng(2);
  Layout y(static_cast<Eigen::Index>(n), 2);
  for (Eigen::Index i = 0; i < y.size(); ++i) y.data()[i] = 10 * rng.normal();
  return y;
}

}  // namespace

static void BM_ConditionalAffinities(benchmark::State& state) {
  const auto x = unit_rows(static_cast<std::size_t>(state.range(0)), 512);
  for (auto _ : state) benchmark::DoNotOptimize(conditional_affinities(x, 30.0));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ConditionalAffinities)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

static void BM_BhGradient(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto p = joint_affinities(unit_rows(n, 64), 30.0);
  const auto y = random_layout(n);
  for (auto _ : state) benchmark::DoNotOptimize(bh_gradient(p, y, 0.5));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BhGradient)->Arg(1000)->Arg(7000)->Unit(benchmark::kMillisecond);

static void BM_ExactGradient(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto p = joint_affinities(unit_rows(n, 64), 30.0);
  const auto y = random_layout(n);
  for (auto _ : state) benchmark::DoNotOptimize(exact_gradient(p, y));
}
BENCHMARK(BM_ExactGradient)->Arg(1000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
