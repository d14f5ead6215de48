#include <benchmark/benchmark.h>

#include "facespace/kde.hpp"
#include "facespace/rng.hpp"
#include "facespace/similarity.hpp"
#include "facespace/synthgen.hpp"

using namespace facespace;

static void BM_BuildPairsAndAuc(benchmark::State& state) {
  SynthConfig c;
  c.n_identities_per_gender = static_cast<std::size_t>(state.range(0));
  c.strength_levels = {100};
  const auto d = generate_dataset(c);
  for (auto _ : state) benchmark::DoNotOptimize(auc(build_pairs(d, 100)).auc);
}
BENCHMARK(BM_BuildPairsAndAuc)->Arg(20)->Arg(70)->Unit(benchmark::kMillisecond);

static void BM_Auc(benchmark::State& state) {
  Rng rng(3);
  std::vector<double> same(static_cast<std::size_t>(state.range(0))), diff(same.size() * 10);
  for (auto& v : same) v = rng.normal() + 1;
  for (auto& v : diff) v = rng.normal();
  for (auto _ : state) benchmark::DoNotOptimize(auc(same, diff).auc);
}
BENCHMARK(BM_Auc)->Arg(1000)->Arg(10000);

static void BM_Kde(benchmark::State& state) {
  Rng rng(4);
  std::vector<double> s(static_cast<std::size_t>(state.range(0)));
  for (auto& v : s) v = rng.normal();
  for (auto _ : state) benchmark::DoNotOptimize(kde(s));
}
BENCHMARK(BM_Kde)->Arg(1000)->Arg(100000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
