#include <benchmark/benchmark.h>

#include "nonholo/ensemble.hpp"

using namespace nonholo;

static void BM_OrnsteinUhlenbeckEnsemble(benchmark::State& state) {
  const sde::StratonovichField f(1, 1, [](std::span<const double> x, std::span<double> d, std::span<double> b) {
    d[0] = -x[0];
    b[0] = 0.5;
  });
  ensemble::EnsembleSpec spec;
  spec.field = &f;
  spec.x0 = {0.0};
  spec.n_paths = 4096;
  spec.dt = 1e-2;
  spec.n_steps = 100;
  spec.stride = 10;
  spec.threads = static_cast<std::size_t>(state.range(0));
  spec.functionals = {{"x", [](std::span<const double> x) { return x[0]; }}};
  for (auto _ : state) benchmark::DoNotOptimize(ensemble::run_ensemble(spec));
  state.SetItemsProcessed(state.iterations() * 4096);
}
BENCHMARK(BM_OrnsteinUhlenbeckEnsemble)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);
