#include <benchmark/benchmark.h>

#include "qosalloc/allocator.hpp"
#include "qosalloc/mdone.hpp"
#include "qosalloc/queue_sim.hpp"
#include "qosalloc/scenario.hpp"

namespace {

using namespace qosalloc;

void BM_MinPowerAlloc(benchmark::State& state) {
  const SystemParams p = SystemParams::reference(8);
  const double alpha = path_loss(120.0);
  double g = 4.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(min_power_alloc(0.8, alpha, g, p));
    g = g < 12.0 ? g + 0.37 : 0.5;
  }
}
BENCHMARK(BM_MinPowerAlloc);

void BM_PtwRatio(benchmark::State& state) {
  const SystemParams p = SystemParams::reference(8);
  const double alpha = path_loss(120.0);
  for (auto _ : state) benchmark::DoNotOptimize(ptw_ratio(alpha, 8, p));
}
BENCHMARK(BM_PtwRatio);

void BM_MdonePmf(benchmark::State& state) {
  const auto levels = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(mdone::stationary_pmf(0.7, levels));
}
BENCHMARK(BM_MdonePmf)->Arg(20)->Arg(200)->Arg(2000);

void BM_SimulateFrames(benchmark::State& state) {
  const SystemParams p = SystemParams::reference(8);
  TopologySpec topo;
  topo.users = 8;
  topo.nearby_count = 7;
  QosBudget budget;
  const Scenario sc{p, build_highway_topology(topo, p, budget), budget.loss_prob};
  SimOptions opts;
  opts.policy = state.range(0) == 0 ? Policy::kConstantRate : Policy::kTwoStateFinite;
  opts.account_power = state.range(0) != 0;
  opts.frames = 100000;
  for (auto _ : state) benchmark::DoNotOptimize(run(sc, opts));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(opts.frames * sc.users.size()));
}
BENCHMARK(BM_SimulateFrames)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
