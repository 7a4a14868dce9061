#include <benchmark/benchmark.h>

#include "nonholo/fokker_planck.hpp"

using namespace nonholo;

static void BM_FokkerPlanckSteps(benchmark::State& state) {
  const auto cells = static_cast<std::size_t>(state.range(0));
  const suslov::SuslovParams p{InertiaTensor::diagonal(1, 2, 3), {0, 0, 1}, suslov::Potential::zero()};
  const auto field = suslov::type1_field(p, suslov::ScalarNoise::ornstein_uhlenbeck(1.0, 0.5));
  const Axis axis{-3.0, 3.0, cells};
  const std::array<Axis, 3> axes{axis, axis, axis};
  const auto gen = fp::assemble_generator(field, fp::suslov_type1_reduction(p), axes);
  const double dt = fp::max_stable_dt(gen);
  for (auto _ : state) {
    Grid3 g = point_mass(axes, {0.0, 0.0, 0.0});
    fp::fp_solve(g, gen, 10.0 * dt, dt);
    benchmark::DoNotOptimize(g.density().data());
  }
  state.SetItemsProcessed(state.iterations() * 10 * static_cast<std::int64_t>(cells * cells * cells));
}
BENCHMARK(BM_FokkerPlanckSteps)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);
