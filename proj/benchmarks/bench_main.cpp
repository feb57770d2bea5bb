#include <benchmark/benchmark.h>

#include <vector>

#include "levykac/clt.hpp"
#include "levykac/convolution.hpp"
#include "levykac/densities.hpp"
#include "levykac/kac_sphere.hpp"
#include "levykac/stable.hpp"

using namespace levykac;

namespace {

StableParams fitted(const DensityModel& f) {
  const auto tl = estimate_tail_law(h_of(f), 1e4, 1e8);
  return exponent_from_tail({tl.C_S, tl.alpha, tl.p, tl.q});
}

void BM_StableDensity(benchmark::State& state) {
  const StableParams p{1.0, 1.5, 1.0};
  double x = -3.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(stable_density(p, x));
    x = x > 3.0 ? -3.0 : x + 0.01;
  }
}
BENCHMARK(BM_StableDensity);

void BM_TailFit(benchmark::State& state) {
  const auto h = h_of(make_model("quartic"));
  for (auto _ : state) benchmark::DoNotOptimize(estimate_tail_law(h, 1e4, 1e8));
}
BENCHMARK(BM_TailFit)->Unit(benchmark::kMillisecond);

// Fresh power each iteration so the level caches are part of the cost.
void BM_ConvolutionPower(benchmark::State& state) {
  const auto h = h_of(make_model("quartic"));
  const int N = static_cast<int>(state.range(0));
  std::vector<double> u;
  for (int i = 1; i <= 64; ++i) u.push_back(0.05 * N * i);
  for (auto _ : state) {
    ConvolutionPower power(h, N);
    benchmark::DoNotOptimize(power.evaluate(u));
  }
}
BENCHMARK(BM_ConvolutionPower)->Arg(16)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

void BM_CltSupError(benchmark::State& state) {
  const auto q = make_model("quartic");
  const auto p = fitted(q);
  for (auto _ : state) benchmark::DoNotOptimize(clt_sup_error(q, static_cast<int>(state.range(0)), p));
}
BENCHMARK(BM_CltSupError)->Arg(64)->Arg(1024)->Unit(benchmark::kMillisecond);

void BM_ChaosReport(benchmark::State& state) {
  const auto q = make_model("quartic");
  for (auto _ : state) benchmark::DoNotOptimize(chaos_report(SphereLaw(q, static_cast<int>(state.range(0)))));
}
BENCHMARK(BM_ChaosReport)->Arg(64)->Arg(1024)->Unit(benchmark::kMillisecond)->Iterations(2);

}  // namespace

BENCHMARK_MAIN();
