#include <gtest/gtest.h>

#include <cmath>
#include <memory>

#include "nonholo/errors.hpp"
#include "nonholo/lda_local.hpp"
#include "nonholo/sde.hpp"

using namespace nonholo;
using namespace nonholo::lda;

namespace {

// Particle zdot = y xdot + N written with a Lagrange multiplier in all three
// velocities: xddot = -y lambda, yddot = 0, zddot = lambda with
// lambda dt = (ydot xdot dt + dN) / (1 + y^2). Integrated with its own Heun loop.
// State (x, y, z, xd, yd, zd, N).
std::vector<double> multiplier_oracle(const std::vector<double>& x0, const sde::WienerPath& path, double theta,
                                      double sigma, bool ideal) {
  auto rates = [&](const std::vector<double>& s, std::vector<double>& a, std::vector<double>& b) {
    const double y = s[1], xd = s[3], yd = s[4], n = s[6];
    const double slope = ideal ? y + n : y;
    // Differentiating zd = slope * xd (+ N for the affine kind) gives the multiplier.
    const double dn_a = -theta * n, dn_b = sigma;
    const double coupling = ideal ? xd : 1.0;
    const double den = 1.0 + slope * slope;
    const double lam_a = (yd * xd + coupling * dn_a) / den;
    const double lam_b = coupling * dn_b / den;
    a = {xd, yd, s[5], -slope * lam_a, 0.0, lam_a, dn_a};
    b = {0.0, 0.0, 0.0, -slope * lam_b, 0.0, lam_b, dn_b};
  };
  std::vector<double> s = x0, a0, b0, a1, b1, pred(7);
  for (std::size_t k = 0; k < path.n_steps; ++k) {
    const double dw = path.increments[k];
    rates(s, a0, b0);
    for (int i = 0; i < 7; ++i) pred[i] = s[i] + a0[i] * path.dt + b0[i] * dw;
    rates(pred, a1, b1);
    for (int i = 0; i < 7; ++i) s[i] += 0.5 * (a0[i] + a1[i]) * path.dt + 0.5 * (b0[i] + b1[i]) * dw;
  }
  return s;
}

double path_energy_drift(const sde::StratonovichField& field, const ChartSystem& sys, ConstraintKind kind,
                         const std::vector<double>& x0, const sde::WienerPath& path) {
  const auto tr = sde::integrate(field, x0, path);
  auto energy_at = [&](std::span<const double> x) {
    const auto v = split_state(sys, x);
    return energy(sys, v.q, constrained_velocity(sys, kind, v.q, v.u, v.noise));
  };
  const double e0 = energy_at(tr.state(0));
  double worst = 0.0;
  for (std::size_t i = 0; i < tr.size(); ++i) worst = std::max(worst, std::abs(energy_at(tr.state(i)) - e0));
  return worst;
}

}  // namespace

TEST(BCoefficients, ParticleCurvature) {
  const auto sys = nonholonomic_particle(ConstraintKind::Affine, 0.0, 0.0);
  const std::vector<double> q{0.3, -0.7, 1.1};
  const auto b = b_coefficients(sys, q);
  ASSERT_EQ(b.size(), 4u);
  EXPECT_NEAR(b[0], 0.0, 1e-9);
  EXPECT_NEAR(b[1], -1.0, 1e-8);
  EXPECT_NEAR(b[2], 1.0, 1e-8);
  EXPECT_NEAR(b[3], 0.0, 1e-9);
}

TEST(BCoefficients, ConstantConnectionIsFlat) {
  auto sys = nonholonomic_particle(ConstraintKind::Affine, 0.0, 0.0);
  sys.coefficients = [](std::span<const double>, std::span<const double>, std::span<double> out) {
    out[0] = 0.4;
    out[1] = -2.0;
  };
  for (double v : b_coefficients(sys, std::vector<double>{1.0, 2.0, 3.0})) EXPECT_NEAR(v, 0.0, 1e-9);
}

TEST(BCoefficients, Antisymmetric) {
  ChartSystem sys = nonholonomic_particle(ConstraintKind::Affine, 0.0, 0.0);
  sys.n = 4;
  sys.m = 1;
  sys.mass = [](std::span<const double>, std::span<double> mm) {
    for (std::size_t i = 0; i < 16; ++i) mm[i] = (i % 5 == 0) ? 1.0 : 0.0;
  };
  sys.coefficients = [](std::span<const double> q, std::span<const double>, std::span<double> out) {
    out[0] = std::sin(q[1]) * q[3];
    out[1] = q[0] * q[2] + q[3] * q[3];
    out[2] = std::exp(0.2 * q[0]) - q[1] * q[3];
  };
  const auto b = b_coefficients(sys, std::vector<double>{0.2, -0.4, 0.9, 0.5});
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_NEAR(b[i * 3 + i], 0.0, 1e-9);
    for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(b[i * 3 + j], -b[j * 3 + i], 1e-8);
  }
}

TEST(TypeI, DeterministicParticleMatchesMultiplierForm) {
  auto sys = std::make_shared<ChartSystem>(nonholonomic_particle(ConstraintKind::Affine, 0.0, 0.0));
  const auto field = type1_field(sys);
  const std::vector<double> x0{0.0, 0.5, 0.0, 1.0, 0.8, 0.0};
  const auto path = sde::wiener_path(1, 10000, 1e-4);
  const auto tr = sde::integrate(field, x0, path);
  const auto ref = multiplier_oracle({0.0, 0.5, 0.0, 1.0, 0.8, 0.5, 0.0}, path, 0.0, 0.0, false);
  const auto xt = tr.back();
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(xt[i], ref[i], 1e-6) << i;
  EXPECT_NEAR(xt[3], ref[3], 1e-6);
  EXPECT_NEAR(xt[4], ref[4], 1e-6);
}

TEST(TypeI, StochasticParticleMatchesMultiplierForm) {
  auto sys = std::make_shared<ChartSystem>(nonholonomic_particle(ConstraintKind::Affine, 1.0, 0.5));
  const auto field = type1_field(sys);
  const std::vector<double> x0{0.0, 0.5, 0.0, 1.0, 0.8, 0.2};
  const auto path = sde::wiener_path(11, 10000, 1e-4);
  const auto tr = sde::integrate(field, x0, path);
  const auto xt = tr.back();
  const auto ref = multiplier_oracle({0.0, 0.5, 0.0, 1.0, 0.8, 0.5 + 0.2, 0.2}, path, 1.0, 0.5, false);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(xt[i], ref[i], 1e-4) << i;
  EXPECT_NEAR(xt[3], ref[3], 1e-4);
  EXPECT_NEAR(xt[5], ref[6], 1e-12);
}

TEST(TypeI, ConstraintHoldsAlongPath) {
  auto sys = std::make_shared<ChartSystem>(nonholonomic_particle(ConstraintKind::Affine, 1.0, 1.0));
  const auto tr = sde::integrate(type1_field(sys), std::vector<double>{0.1, 0.2, 0.3, 0.5, -0.5, 0.0},
                                 sde::wiener_path(3, 2000, 1e-3));
  for (std::size_t i = 0; i < tr.size(); ++i) {
    const auto v = split_state(*sys, tr.state(i));
    const auto vel = constrained_velocity(*sys, ConstraintKind::Affine, v.q, v.u, v.noise);
    EXPECT_LE(std::abs(constraint_residual(*sys, ConstraintKind::Affine, v.q, vel, v.noise)[0]), 1e-10);
  }
}

TEST(TypeI, EnergyIsNotConserved) {
  // With an affine constraint the reaction force does work, so refining dt
  // does not drive the energy drift to zero.
  const auto sys = nonholonomic_particle(ConstraintKind::Affine, 1.0, 0.5);
  const auto field = type1_field(std::make_shared<ChartSystem>(sys));
  const std::vector<double> x0{0.0, 0.5, 0.0, 1.0, 0.8, 0.2};
  const auto fine = sde::wiener_path(5, 4000, 2.5e-4);
  const double d1 = path_energy_drift(field, sys, ConstraintKind::Affine, x0, fine.coarsen(2));
  const double d2 = path_energy_drift(field, sys, ConstraintKind::Affine, x0, fine);
  EXPECT_GT(d1, 1e-2);
  EXPECT_LT(d1 / d2, 1.5);
}

TEST(TypeII, ConstraintHoldsAlongPath) {
  auto sys = std::make_shared<ChartSystem>(nonholonomic_particle(ConstraintKind::Ideal, 1.0, 0.3));
  const auto tr = sde::integrate(type2_field(sys), std::vector<double>{0.1, 0.2, 0.3, 0.5, -0.5, 0.1},
                                 sde::wiener_path(4, 2000, 1e-3));
  for (std::size_t i = 0; i < tr.size(); ++i) {
    const auto v = split_state(*sys, tr.state(i));
    const auto vel = constrained_velocity(*sys, ConstraintKind::Ideal, v.q, v.u, v.noise);
    EXPECT_LE(std::abs(constraint_residual(*sys, ConstraintKind::Ideal, v.q, vel, v.noise)[0]), 1e-10);
  }
}

TEST(TypeII, MatchesMultiplierForm) {
  auto sys = std::make_shared<ChartSystem>(nonholonomic_particle(ConstraintKind::Ideal, 1.0, 0.3));
  const std::vector<double> x0{0.0, 0.5, 0.0, 1.0, 0.8, 0.2};
  const auto path = sde::wiener_path(12, 10000, 1e-4);
  const auto tr = sde::integrate(type2_field(sys), x0, path);
  const auto xt = tr.back();
  const auto ref = multiplier_oracle({0.0, 0.5, 0.0, 1.0, 0.8, 0.7, 0.2}, path, 1.0, 0.3, true);
  for (int i = 0; i < 5; ++i) EXPECT_NEAR(xt[i], ref[i], 1e-4) << i;
}

TEST(TypeII, EnergyDriftHalves) {
  const auto sys = nonholonomic_particle(ConstraintKind::Ideal, 1.0, 0.3);
  const auto field = type2_field(std::make_shared<ChartSystem>(sys));
  const std::vector<double> x0{0.0, 0.5, 0.0, 1.0, 0.8, 0.2};
  const auto fine = sde::wiener_path(6, 4000, 2.5e-4);
  const double d1 = path_energy_drift(field, sys, ConstraintKind::Ideal, x0, fine.coarsen(2));
  const double d2 = path_energy_drift(field, sys, ConstraintKind::Ideal, x0, fine);
  EXPECT_LT(d1, 1e-3);
  EXPECT_GE(d1 / d2, 1.8);
}

TEST(TypeI, ZeroConnectionIsFreeMotion) {
  auto sys = std::make_shared<ChartSystem>(nonholonomic_particle(ConstraintKind::Affine, 0.5, 0.4));
  sys->coefficients = [](std::span<const double>, std::span<const double>, std::span<double> out) {
    out[0] = out[1] = 0.0;
  };
  const auto tr = sde::integrate(type1_field(sys), std::vector<double>{0.0, 0.0, 0.0, 0.3, -0.2, 0.1},
                                 sde::wiener_path(8, 1000, 1e-3));
  const auto xt = tr.back();
  EXPECT_NEAR(xt[0], 0.3, 1e-12);
  EXPECT_NEAR(xt[1], -0.2, 1e-12);
  EXPECT_NEAR(xt[3], 0.3, 1e-12);
  EXPECT_NEAR(xt[4], -0.2, 1e-12);
}

TEST(Validation, RejectsBadSystems) {
  auto sys = nonholonomic_particle(ConstraintKind::Affine, 0.0, 0.0);
  sys.p = 2;
  EXPECT_THROW(validate(sys, ConstraintKind::Affine), Error);
  sys = nonholonomic_particle(ConstraintKind::Affine, 0.0, 0.0);
  sys.mass = nullptr;
  EXPECT_THROW(validate(sys, ConstraintKind::Affine), Error);
}

TEST(Validation, ChartDomainIsEnforced) {
  auto sys = std::make_shared<ChartSystem>(nonholonomic_particle(ConstraintKind::Affine, 0.0, 0.0));
  sys->domain = [](std::span<const double> q) { return q[0] < 0.5; };
  const auto field = type1_field(sys);
  try {
    (void)sde::integrate(field, std::vector<double>{0.0, 0.0, 0.0, 1.0, 0.0, 0.0}, sde::wiener_path(1, 100, 0.01));
    FAIL() << "expected ChartDomain";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ChartDomain);
  }
}

TEST(Validation, SingularMassIsReported) {
  auto sys = std::make_shared<ChartSystem>(nonholonomic_particle(ConstraintKind::Affine, 0.0, 0.0));
  sys->mass = [](std::span<const double>, std::span<double> mm) {
    for (std::size_t i = 0; i < 9; ++i) mm[i] = 0.0;
    mm[8] = 1.0;
  };
  const auto field = type1_field(sys);
  std::vector<double> d(6), b(6);
  try {
    field.evaluate(std::vector<double>{0.0, 0.0, 0.0, 1.0, 0.0, 0.0}, d, b);
    FAIL() << "expected HessianSingular";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::HessianSingular);
  }
}
