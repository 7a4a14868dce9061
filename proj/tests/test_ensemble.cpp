#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "nonholo/ensemble.hpp"
#include "nonholo/errors.hpp"
#include "nonholo/sde.hpp"

using namespace nonholo;
using namespace nonholo::ensemble;

namespace {

sde::StratonovichField ou_field(double theta, double sigma) {
  return {1, 1, [=](std::span<const double> x, std::span<double> d, std::span<double> b) {
            d[0] = -theta * x[0];
            b[0] = sigma;
          }};
}

Functional first() { return {"x", [](std::span<const double> x) { return x[0]; }}; }

}  // namespace

TEST(Seeds, Injective) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t k = 0; k < 100000; ++k) seen.insert(derive_seed(2024, k));
  EXPECT_EQ(seen.size(), 100000u);
  EXPECT_NE(derive_seed(1, 0), derive_seed(2, 0));
  EXPECT_NE(initial_seed(1, 0), derive_seed(1, 0));
}

TEST(Run, SinglePathMatchesIntegrate) {
  const auto f = ou_field(1.0, 0.5);
  EnsembleSpec spec;
  spec.field = &f;
  spec.x0 = {0.3};
  spec.n_paths = 1;
  spec.master_seed = 99;
  spec.dt = 0.01;
  spec.n_steps = 200;
  spec.stride = 10;
  spec.retain = true;
  spec.functionals = {first()};
  const auto r = run_ensemble(spec);
  const auto tr = sde::integrate(f, spec.x0, sde::wiener_path(derive_seed(99, 0), 200, 0.01), {10});
  ASSERT_EQ(r.trajectories.size(), 1u);
  EXPECT_EQ(r.trajectories[0].states, tr.states);
  EXPECT_EQ(r.final_states[0], tr.back()[0]);
  EXPECT_EQ(r.series[0].mean.back(), tr.back()[0]);
  EXPECT_EQ(r.series[0].variance.back(), 0.0);
}

TEST(Run, ThreadCountDoesNotChangeResults) {
  const auto f = ou_field(1.0, 0.5);
  EnsembleSpec spec;
  spec.field = &f;
  spec.x0 = {0.0};
  spec.n_paths = 1000;
  spec.master_seed = 5;
  spec.dt = 0.01;
  spec.n_steps = 100;
  spec.stride = 5;
  spec.functionals = {first(), {"sq", [](std::span<const double> x) { return x[0] * x[0]; }}};
  spec.threads = 1;
  const auto a = run_ensemble(spec);
  spec.threads = 8;
  const auto b = run_ensemble(spec);
  EXPECT_EQ(a.final_states, b.final_states);
  for (std::size_t s = 0; s < 2; ++s) {
    EXPECT_EQ(a.series[s].mean, b.series[s].mean);
    EXPECT_EQ(a.series[s].variance, b.series[s].variance);
    EXPECT_EQ(a.series[s].min, b.series[s].min);
    EXPECT_EQ(a.series[s].max, b.series[s].max);
  }
}

TEST(Run, OrnsteinUhlenbeckVariance) {
  const double theta = 1.0, sigma = 0.5;
  const auto f = ou_field(theta, sigma);
  EnsembleSpec spec;
  spec.field = &f;
  spec.x0 = {0.0};
  spec.n_paths = 20000;
  spec.master_seed = 77;
  spec.dt = 0.01;
  spec.n_steps = 100;
  spec.stride = 25;
  spec.threads = 0;
  spec.functionals = {first()};
  const auto r = run_ensemble(spec);
  const auto& s = r.series[0];
  const double n = static_cast<double>(spec.n_paths);
  for (std::size_t i = 1; i < s.times.size(); ++i) {
    const double t = s.times[i];
    const double exact = sigma * sigma / (2.0 * theta) * (1.0 - std::exp(-2.0 * theta * t));
    // Standard error of the sample variance of Gaussian data.
    const double se = exact * std::sqrt(2.0 / (n - 1.0));
    EXPECT_NEAR(s.variance[i], exact, 3.0 * se) << "t = " << t;
  }
}

TEST(Run, ConstantFunctionalHasNoVariance) {
  const auto f = ou_field(1.0, 0.5);
  EnsembleSpec spec;
  spec.field = &f;
  spec.x0 = {0.0};
  spec.n_paths = 300;
  spec.n_steps = 10;
  spec.functionals = {{"one", [](std::span<const double>) { return 1.0; }}};
  const auto r = run_ensemble(spec);
  for (double v : r.series[0].variance) EXPECT_EQ(v, 0.0);
  for (double m : r.series[0].mean) EXPECT_EQ(m, 1.0);
}

TEST(Run, EmptyEnsemble) {
  const auto f = ou_field(1.0, 0.5);
  EnsembleSpec spec;
  spec.field = &f;
  spec.x0 = {0.0};
  spec.n_paths = 0;
  try {
    (void)run_ensemble(spec);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyEnsemble);
  }
}

TEST(Run, RandomInitialStatesAreReproducible) {
  const auto f = ou_field(1.0, 0.0);
  EnsembleSpec spec;
  spec.field = &f;
  spec.x0 = {0.0};
  spec.n_paths = 200;
  spec.n_steps = 1;
  spec.initial = [](sde::CounterRng& rng, std::span<double> x) { x[0] = rng.uniform(); };
  spec.threads = 1;
  const auto a = run_ensemble(spec);
  spec.threads = 4;
  const auto b = run_ensemble(spec);
  EXPECT_EQ(a.final_states, b.final_states);
  EXPECT_NE(a.final_states[0], a.final_states[1]);
}

namespace {

// Blows up for paths whose Wiener increments push x past the threshold.
sde::StratonovichField fragile_field() {
  return {1, 1, [](std::span<const double> x, std::span<double> d, std::span<double> b) {
            d[0] = x[0] > 0.25 ? std::nan("") : 0.0;
            b[0] = 1.0;
          }};
}

}  // namespace

TEST(Failures, RecordAndContinue) {
  const auto f = fragile_field();
  EnsembleSpec spec;
  spec.field = &f;
  spec.x0 = {0.0};
  spec.n_paths = 200;
  spec.dt = 0.01;
  spec.n_steps = 20;
  spec.functionals = {first()};
  spec.policy = FailurePolicy::RecordAndContinue;
  const auto r = run_ensemble(spec);
  ASSERT_FALSE(r.failures.empty());
  EXPECT_EQ(r.failures.size() + r.completed.size(), 200u);
  EXPECT_EQ(r.series[0].count, r.completed.size());
  for (const auto& fail : r.failures) EXPECT_EQ(fail.code, ErrorCode::NonFiniteState);
  for (double v : r.final_states) EXPECT_TRUE(std::isfinite(v));
}

TEST(Failures, AbortAllReportsLowestIndex) {
  const auto f = fragile_field();
  EnsembleSpec spec;
  spec.field = &f;
  spec.x0 = {0.0};
  spec.n_paths = 200;
  spec.dt = 0.01;
  spec.n_steps = 20;
  spec.policy = FailurePolicy::RecordAndContinue;
  const auto recorded = run_ensemble(spec);
  ASSERT_FALSE(recorded.failures.empty());
  const std::size_t lowest = recorded.failures.front().index;
  spec.policy = FailurePolicy::AbortAll;
  for (std::size_t threads : {1u, 4u}) {
    spec.threads = threads;
    try {
      (void)run_ensemble(spec);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::NonFiniteState);
      EXPECT_NE(std::string(e.what()).find("path " + std::to_string(lowest)), std::string::npos) << e.what();
    }
  }
}

TEST(Stats, FunctionalStatsMatchesDirectMoments) {
  std::vector<sde::Trajectory> trs(3);
  const double vals[3] = {1.0, 2.0, 6.0};
  for (int i = 0; i < 3; ++i) {
    trs[i].dim = 1;
    trs[i].times = {0.0, 1.0};
    trs[i].states = {0.0, vals[i]};
  }
  const auto s = functional_stats(trs, first());
  EXPECT_DOUBLE_EQ(s.mean[1], 3.0);
  EXPECT_DOUBLE_EQ(s.variance[1], 7.0);
  EXPECT_EQ(s.min[1], 1.0);
  EXPECT_EQ(s.max[1], 6.0);
  EXPECT_EQ(s.variance[0], 0.0);
  EXPECT_THROW(functional_stats(std::span<const sde::Trajectory>{}, first()), Error);
}

TEST(Stats, MomentsMergeMatchesSequential) {
  Moments all, left, right;
  for (int i = 0; i < 100; ++i) {
    const double x = std::sin(0.37 * i) * 3.0 + 0.1 * i;
    all.add(x);
    (i < 37 ? left : right).add(x);
  }
  left.merge(right);
  EXPECT_NEAR(left.mean, all.mean, 1e-13);
  EXPECT_NEAR(left.variance(), all.variance(), 1e-12);
  EXPECT_EQ(left.min, all.min);
  EXPECT_EQ(left.max, all.max);
}

TEST(Histogram, SingleBin) {
  const std::vector<double> states{0.1, 0.2, 0.3};
  const std::array<Axis, 3> axes{Axis{0, 2, 1}, Axis{0, 1, 1}, Axis{0, 0.5, 1}};
  const auto g = histogram(states, 3, {0, 1, 2}, axes);
  EXPECT_DOUBLE_EQ(g.density()[0], 1.0);
  EXPECT_THROW(histogram(std::span<const double>{}, 3, {0, 1, 2}, axes), Error);
}

TEST(Histogram, GaussianSamples) {
  sde::CounterRng rng(2024);
  const std::size_t n = 100000;
  std::vector<double> states(n);
  for (double& v : states) v = rng.gaussian();
  const std::array<Axis, 3> axes{Axis{-5, 5, 64}, Axis{-1, 1, 1}, Axis{-1, 1, 1}};
  std::vector<double> padded;
  for (double v : states) padded.insert(padded.end(), {v, 0.0, 0.0});
  const auto g = histogram(padded, 3, {0, 1, 2}, axes);
  double l1 = 0.0;
  for (std::size_t i = 0; i < 64; ++i) {
    const double a = axes[0].face(i), b = axes[0].face(i + 1);
    const double cell_mass = 0.5 * (std::erf(b / std::sqrt(2.0)) - std::erf(a / std::sqrt(2.0)));
    l1 += std::abs(g.density()[i] * g.cell_volume() - cell_mass);
  }
  EXPECT_LE(l1, 0.05);
}
