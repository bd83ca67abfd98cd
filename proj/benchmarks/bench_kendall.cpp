#include <benchmark/benchmark.h>

#include <vector>

#include "randshift/rng.hpp"
#include "randshift/statistics.hpp"

namespace {

using randshift::Rng;

std::pair<std::vector<double>, std::vector<double>> random_sample(int n) {
  Rng rng(static_cast<std::uint64_t>(n));
  std::vector<double> m(static_cast<std::size_t>(n)), z(m);
  for (int i = 0; i < n; ++i) {
    m[static_cast<std::size_t>(i)] = rng.normal();
    z[static_cast<std::size_t>(i)] = rng.normal();
  }
  return {std::move(m), std::move(z)};
}

void BM_KendallReference(benchmark::State& state) {
  const auto [m, z] = random_sample(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(randshift::stat_kendall_reference(m, z));
  }
}

void BM_KendallFast(benchmark::State& state) {
  const auto [m, z] = random_sample(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(randshift::stat_kendall_fast(m, z));
  }
}

}  // namespace

BENCHMARK(BM_KendallReference)->Arg(148)->Arg(512)->Arg(1600);
BENCHMARK(BM_KendallFast)->Arg(148)->Arg(512)->Arg(1600);
