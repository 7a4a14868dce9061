#include <benchmark/benchmark.h>

#include <cmath>

#include "nonholo/rolling.hpp"
#include "nonholo/sde.hpp"
#include "nonholo/suslov.hpp"

using namespace nonholo;

static void BM_SuslovTypeIField(benchmark::State& state) {
  const suslov::SuslovParams p{InertiaTensor::diagonal(1, 2, 3), {0, 0, 1}, suslov::Potential::linear({0.5, 0.3, 0})};
  const auto f = suslov::type1_field(p, suslov::ScalarNoise::ornstein_uhlenbeck(1.0, 0.5));
  const std::vector<double> x{1.0, 0.5, 0.2, 0.3, 0.4, std::sqrt(0.75), 0.2};
  std::vector<double> d(7), b(7);
  for (auto _ : state) {
    f.evaluate(x, d, b);
    benchmark::DoNotOptimize(d.data());
  }
}
BENCHMARK(BM_SuslovTypeIField);

static void BM_SuslovTypeIIPath(benchmark::State& state) {
  const suslov::SuslovParams p{InertiaTensor::diagonal(1, 2, 3), {0, 0, 1}, suslov::Potential::linear({0.5, 0.3, 0})};
  const auto noise = suslov::cross_noise(suslov::CrossKind::Gamma, Vec3{0.1, 0.2, 0.3}, Vec3{0.06, -0.04, 0.1}, p);
  const auto f = suslov::type2_field(p, noise, 1e-8);
  const std::vector<double> x0{1, 0.5, 0.2, 0.3, 0.4, std::sqrt(0.75), -0.35301270189221928, 0.80602540378443854, -0.25};
  const auto path = sde::wiener_path(1, 1000, 1e-3);
  for (auto _ : state) {
    std::vector<double> x = x0;
    sde::integrate_final(f, x, path);
    benchmark::DoNotOptimize(x.data());
  }
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_SuslovTypeIIPath);

static void BM_RollingTypeIField(benchmark::State& state) {
  rolling::RollingParams p;
  p.inertia = InertiaTensor::diagonal(1, 2, 3);
  p.mass = 2.0;
  p.alpha = rolling::skew_alpha(0.5);
  const auto f = rolling::type1_field(p, rolling::NoiseModel::ornstein_uhlenbeck(1.0, {0.3, 0.2, 0.1}));
  const std::vector<double> x{1.0, 0.5, 0.2, 0.0, 0.6, 0.8, 0.1, 0.0, 0.0};
  std::vector<double> d(9), b(9);
  for (auto _ : state) {
    f.evaluate(x, d, b);
    benchmark::DoNotOptimize(d.data());
  }
}
BENCHMARK(BM_RollingTypeIField);
