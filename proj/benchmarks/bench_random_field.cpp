#include <benchmark/benchmark.h>

#include "randshift/random_field.hpp"

namespace {

using namespace randshift;

void BM_SimulateGrfPair(benchmark::State& state) {
  const int cells = static_cast<int>(state.range(0));
  const GridGeometry geometry = GridGeometry::cover(Rectangle{0, 1, 0, 1}, cells);
  FieldSpec spec;
  spec.correlation = {CorrelationFamily::exponential, 0.2};
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(simulate_grf_pair(spec, geometry, seed++));
  }
  state.SetItemsProcessed(state.iterations() * 2);
}

void BM_EvalField(benchmark::State& state) {
  const GridGeometry geometry = GridGeometry::cover(Rectangle{0, 1, 0, 1}, 128);
  FieldSpec spec;
  spec.correlation = {CorrelationFamily::exponential, 0.2};
  const CovariateField field = simulate_grf(spec, geometry, 7);
  double x = 0.123, y = 0.456;
  for (auto _ : state) {
    benchmark::DoNotOptimize(field.eval({x, y}));
    x += 0.000173;
    if (x > 0.99) x -= 0.98;
    y += 0.000419;
    if (y > 0.99) y -= 0.98;
  }
}

}  // namespace

BENCHMARK(BM_SimulateGrfPair)->Arg(64)->Arg(128)->Arg(256);
BENCHMARK(BM_EvalField);
