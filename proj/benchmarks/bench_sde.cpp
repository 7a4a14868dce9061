#include <benchmark/benchmark.h>

#include <cmath>

#include "nonholo/sde.hpp"

using namespace nonholo;

static void BM_WienerPath(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(sde::wiener_path(++seed, n, 1e-3));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_WienerPath)->Arg(1000)->Arg(100000);

static void BM_HeunStepScalar(benchmark::State& state) {
  const sde::StratonovichField f(1, 1, [](std::span<const double> x, std::span<double> d, std::span<double> b) {
    d[0] = -x[0];
    b[0] = 0.5 * std::cos(x[0]);
  });
  sde::HeunStepper stepper(f);
  std::vector<double> x{1.0};
  const double dw = 1e-3;
  for (auto _ : state) {
    stepper.step(x, 1e-3, {&dw, 1});
    benchmark::DoNotOptimize(x.data());
  }
}
BENCHMARK(BM_HeunStepScalar);
