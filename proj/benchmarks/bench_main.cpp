#include <benchmark/benchmark.h>

#include "dmimo/access.hpp"
#include "dmimo/fronthaul.hpp"
#include "dmimo/mcvalidate.hpp"
#include "dmimo/placement.hpp"

using namespace dmimo;

static void BM_RateCdf(benchmark::State& state) {
  const PowerModel sig = power_model({3e-9, 2e-18});
  const PowerModel intf = power_model({4e-10, 5e-20});
  double x = 1.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(rate_cdf(x, sig, intf, 1e-13));
    x = x < 6.0 ? x + 0.01 : 1.0;
  }
}
BENCHMARK(BM_RateCdf);

static void BM_ExpectedAccessSe(benchmark::State& state) {
  SystemConfig c;
  c.grid_n = static_cast<int>(state.range(0));
  const Scenario sc = make_scenario(c, 1);
  for (auto _ : state) benchmark::DoNotOptimize(expected_access_se(4, sc.initial, sc.traffic, c));
}
BENCHMARK(BM_ExpectedAccessSe)->Arg(20)->Arg(50)->Unit(benchmark::kMillisecond);

static void BM_FronthaulDraw(benchmark::State& state) {
  const SystemConfig c;
  Rng rng = substream(1, stream::kLayout);
  const NetworkLayout l = random_layout(c, rng);
  const auto scheme = static_cast<Scheme>(state.range(0));
  SimOptions o;
  o.warmup_draws = 1;
  for (auto _ : state) benchmark::DoNotOptimize(simulate_fronthaul(scheme, l, c, 1, o));
  state.SetLabel(scheme_name(scheme));
}
BENCHMARK(BM_FronthaulDraw)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
