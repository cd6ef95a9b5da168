#include <benchmark/benchmark.h>

#include "gibbsperc/contour.hpp"
#include "gibbsperc/percolation.hpp"
#include "gibbsperc/sampler.hpp"

using namespace gibbsperc;

namespace {

Exec exec_of(const benchmark::State& state) { return state.range(0) ? Exec::parallel : Exec::serial; }

void BM_LabelClusters(benchmark::State& state) {
  const auto config = sample_poisson(1.4, Box::cube(2, 64.0), 1);
  const BooleanModel bm{config, 0.5};
  for (auto _ : state) benchmark::DoNotOptimize(label_clusters(bm, exec_of(state)));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(config.size()));
}
BENCHMARK(BM_LabelClusters)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_DilatedVolume(benchmark::State& state) {
  const CubeLattice lat{2, 15};
  std::vector<Shape> shapes;
  for (std::int64_t i = 0; i < 6; ++i) shapes.push_back(lat.cube(CubeIndex{i, 2 * i}));
  for (auto _ : state) benchmark::DoNotOptimize(dilated_volume(shapes, 0.2, 1'000'000, 3, exec_of(state)));
}
BENCHMARK(BM_DilatedVolume)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_CrossingFraction(benchmark::State& state) {
  PercOptions opts;
  opts.sampler.kind = SamplerKind::exact_poisson;
  const auto model = ModelSpec::poisson(2, 1.4);
  for (auto _ : state) benchmark::DoNotOptimize(perc_probability(model, 0.5, 16.0, 200, opts, 5, exec_of(state)));
}
BENCHMARK(BM_CrossingFraction)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_AreaInteractionCftp(benchmark::State& state) {
  PercOptions opts;
  const auto model = ModelSpec::area_interaction(2, 1.5, 0.9, 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(perc_probability(model, 0.6, 8.0, 20, opts, 6, exec_of(state)));
}
BENCHMARK(BM_AreaInteractionCftp)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_EnumerateLoops(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(enumerate_loops(12, false, kDefaultLoopCap, exec_of(state)));
}
BENCHMARK(BM_EnumerateLoops)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_PartitionLadder(benchmark::State& state) {
  const auto model = ModelSpec::hard_core(2, 1.0, 0.4);
  for (auto _ : state) {
    benchmark::DoNotOptimize(estimate_partition(model, Box::cube(2, 1.0), {}, 8, 200'000, 7, exec_of(state)));
  }
}
BENCHMARK(BM_PartitionLadder)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
