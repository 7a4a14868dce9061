#include <gtest/gtest.h>

#include <cmath>

#include "nonholo/errors.hpp"
#include "nonholo/sde.hpp"
#include "nonholo/suslov.hpp"

using namespace nonholo;
using namespace nonholo::suslov;

namespace {

SuslovParams diag123(Potential pot = Potential::zero()) {
  return {InertiaTensor::diagonal(1.0, 2.0, 3.0), {0.0, 0.0, 1.0}, pot};
}

Vec3 drift_omega(const sde::StratonovichField& f, const std::vector<double>& x) {
  const auto d = f.drift(x);
  return {d[0], d[1], d[2]};
}

}  // namespace

TEST(Lambda, HandExample) {
  EXPECT_NEAR(lambda_det(diag123(), {1.0, 1.0, 0.0}, {0.0, 0.0, 1.0}), 1.0, 1e-15);
}

TEST(Lambda, IsotropicVanishes) {
  SuslovParams p{InertiaTensor::diagonal(2.0, 2.0, 2.0), {0.3, -0.1, 1.0}, Potential::zero()};
  EXPECT_EQ(lambda_det(p, {1.0, -2.0, 0.5}, {0.0, 1.0, 0.0}), 0.0);
}

TEST(Lambda, LagrangeTopVanishes) {
  SuslovParams p{InertiaTensor::diagonal(1.0, 1.0, 3.0), {0.0, 0.0, 1.0}, Potential::linear({0.0, 0.0, 0.7})};
  EXPECT_NEAR(lambda_det(p, {0.4, -0.9, 0.0}, {0.6, 0.0, 0.8}), 0.0, 1e-15);
}

TEST(DetRhs, HandExample) {
  // I dOmega = -(0,0,1) + lambda e3 with lambda = 1 gives dOmega = 0.
  const auto r = det_rhs(diag123(), {1.0, 1.0, 0.0}, {0.0, 0.0, 1.0});
  EXPECT_NEAR(norm(r.omega), 0.0, 1e-15);
  EXPECT_EQ(r.gamma, cross(Vec3{0.0, 0.0, 1.0}, Vec3{1.0, 1.0, 0.0}));
}

TEST(DetRhs, IsotropicFree) {
  SuslovParams p{InertiaTensor::diagonal(1.5, 1.5, 1.5), {0.0, 0.0, 1.0}, Potential::zero()};
  EXPECT_EQ(det_rhs(p, {0.3, 0.7, 0.0}, {1.0, 0.0, 0.0}).omega, Vec3{});
}

TEST(DetRhs, RejectsConstraintViolation) {
  try {
    (void)det_rhs(diag123(), {0.0, 0.0, 1.0}, {1.0, 0.0, 0.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ConstraintViolated);
  }
}

TEST(DetRhs, KeepsConstraintTangent) {
  const auto p = diag123(Potential::linear({0.5, -0.2, 0.1}));
  const auto r = det_rhs(p, {0.4, -1.3, 0.0}, {0.6, 0.0, 0.8});
  EXPECT_NEAR(dot(p.axis, r.omega), 0.0, 1e-15);
}

TEST(Fields, NoiseOffMatchesDeterministic) {
  const auto p = diag123(Potential::quadratic_ct(0.4));
  const Vec3 om{0.2, -0.5, 0.0}, ga{0.0, 0.6, 0.8};
  const auto r = det_rhs(p, om, ga);
  const auto f1 = type1_field(p, ScalarNoise::constant());
  const auto d1 = drift_omega(f1, {om.x, om.y, om.z, ga.x, ga.y, ga.z, 0.0});
  EXPECT_NEAR(norm(d1 - r.omega), 0.0, 1e-14);
  const auto f2 = type2_field(p, VectorNoise::constant(), 1e-8);
  const auto d2 = drift_omega(f2, {om.x, om.y, om.z, ga.x, ga.y, ga.z, 0.0, 0.0, 1.0});
  EXPECT_NEAR(norm(d2 - r.omega), 0.0, 1e-14);
  for (double b : f1.diffusion(std::vector<double>{om.x, om.y, om.z, ga.x, ga.y, ga.z, 0.0})) EXPECT_EQ(b, 0.0);
}

TEST(Fields, TypeIDiffusionAlongInverseInertiaAxis) {
  SuslovParams p = diag123();
  p.axis = {1.0, 1.0, 1.0};
  const auto f = type1_field(p, ScalarNoise::ornstein_uhlenbeck(1.0, 0.5));
  const auto b = f.diffusion(std::vector<double>{0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0});
  // I^-1 a = (1, 1/2, 1/3), a . I^-1 a = 11/6.
  const double den = 11.0 / 6.0;
  EXPECT_NEAR(b[0], 0.5 / den, 1e-15);
  EXPECT_NEAR(b[1], 0.25 / den, 1e-15);
  EXPECT_NEAR(b[2], 0.5 / 3.0 / den, 1e-15);
  EXPECT_NEAR(b[0] + b[1] + b[2], 0.5, 1e-15);  // a . dOmega = dN
  EXPECT_EQ(b[6], 0.5);
}

TEST(Fields, TypeIIKeepsIdealConstraintTangent) {
  const auto p = diag123(Potential::linear({0.5, 0.3, 0.0}));
  const auto noise = cross_noise(CrossKind::Gamma, Vec3{0.1, 0.2, 0.3}, Vec3{0.3, -0.2, 0.5}, p);
  const auto f = type2_field(p, noise, 1e-8);
  const std::vector<double> x{1.0, 0.5, 0.2, 0.3, 0.4, std::sqrt(0.75), 0.2, -0.3, -0.25};
  const auto d = f.drift(x);
  const auto b = f.diffusion(x);
  const Vec3 om = load3(x, 0), n = load3(x, 6);
  // d(N . Omega) = dN . Omega + N . dOmega = 0 for both dt and dW parts.
  EXPECT_NEAR(dot(load3(d, 6), om) + dot(n, load3(d, 0)), 0.0, 1e-14);
  EXPECT_NEAR(dot(load3(b, 6), om) + dot(n, load3(b, 0)), 0.0, 1e-14);
}

TEST(Fields, TypeIIRejectsVanishingNoise) {
  const auto f = type2_field(diag123(), VectorNoise::constant(), noise_floor_for({0.0, 0.0, 1.0}));
  std::vector<double> d(9), b(9);
  try {
    f.evaluate(std::vector<double>{1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1e-9}, d, b);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoiseSingular);
    EXPECT_TRUE(e.is_numerical());
  }
}

TEST(Validation, ZeroAxis) {
  SuslovParams p = diag123();
  p.axis = {};
  EXPECT_THROW(type1_field(p, ScalarNoise::constant()), ValidationError);
}

TEST(Validation, StateConstructors) {
  const auto p = diag123();
  EXPECT_NO_THROW(make_state_i(p, {1.0, 0.0, 0.5}, {0.0, 0.0, 1.0}, 0.5));
  EXPECT_THROW(make_state_i(p, {1.0, 0.0, 0.5}, {0.0, 0.0, 1.0}, 0.0), Error);
  EXPECT_THROW(make_state_i(p, {1.0, 0.0, 0.0}, {0.0, 0.0, 2.0}, 0.0), Error);
  EXPECT_NO_THROW(make_state_ii({1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}));
  EXPECT_THROW(make_state_ii({1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {1.0, 0.0, 0.0}), Error);
  const auto s = make_state_ii({1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0});
  EXPECT_EQ(StateII::from(s.to_vector()).n, s.n);
}

TEST(Invariants, RestState) {
  const auto r = invariants_report(diag123(), std::vector<double>{0, 0, 0, 0, 0, 1, 0}, ConstraintType::I);
  EXPECT_EQ(r.energy, 0.0);
  EXPECT_EQ(r.lagrange, 0.0);
  EXPECT_EQ(*r.momentum_square, 0.0);
  EXPECT_FALSE(r.kharlamova.has_value());
}

TEST(Invariants, HandExample) {
  const auto r = invariants_report(diag123(), std::vector<double>{1, 1, 0, 0, 0, 1}, ConstraintType::Deterministic);
  EXPECT_DOUBLE_EQ(r.energy, 1.5);
  EXPECT_EQ(r.lagrange, 0.0);
  EXPECT_EQ(r.gamma_norm, 1.0);
  EXPECT_EQ(r.constraint, 0.0);
  EXPECT_DOUBLE_EQ(*invariant_by_name(r, "momentum_square"), 2.5);
  EXPECT_FALSE(invariant_by_name(r, "nope").has_value());
}

TEST(Invariants, ClebschTisserandMatrix) {
  // eps det(I) I^-1 = 0.5 * 6 * diag(1, 1/2, 1/3).
  const Mat3 a = clebsch_tisserand_matrix(diag123(Potential::quadratic_ct(0.5)));
  EXPECT_NEAR(a(0, 0), 3.0, 1e-15);
  EXPECT_NEAR(a(1, 1), 1.5, 1e-15);
  EXPECT_NEAR(a(2, 2), 1.0, 1e-15);
  EXPECT_EQ(a(0, 1), 0.0);
}

TEST(CrossNoise, ChiIsOrthogonal) {
  const auto p = diag123(Potential::linear({0.5, 0.3, 0.0}));
  const auto noise = cross_noise(CrossKind::Chi, Vec3{0.3, 1.0, -2.0}, Vec3{0.7, 0.1, 0.4}, p);
  const Vec3 f = noise.drift({1, 2, 3}, {0, 0, 1}, {1, 0, 0});
  const Vec3 s = noise.diffusion({1, 2, 3}, {0, 0, 1}, {1, 0, 0});
  EXPECT_EQ(dot(f, p.potential.chi), 0.0);
  EXPECT_EQ(dot(s, p.potential.chi), 0.0);
}

TEST(CrossNoise, GammaAndMomentumAreOrthogonal) {
  const auto p = diag123();
  const Vec3 om{0.3, -0.4, 1.2}, ga{0.6, 0.0, 0.8};
  const auto g = cross_noise(CrossKind::Gamma, Vec3{0.1, 0.2, 0.3}, Vec3{-0.2, 0.4, 0.1}, p);
  EXPECT_NEAR(dot(g.drift(om, ga, {}), ga), 0.0, 1e-16);
  EXPECT_NEAR(dot(g.diffusion(om, ga, {}), ga), 0.0, 1e-16);
  const auto m = cross_noise(CrossKind::Momentum, Vec3{0.1, 0.2, 0.3}, Vec3{-0.2, 0.4, 0.1}, p);
  const Vec3 iom = p.inertia.apply(om);
  EXPECT_NEAR(dot(m.drift(om, ga, {}), iom), 0.0, 1e-15);
  EXPECT_NEAR(dot(m.diffusion(om, ga, {}), iom), 0.0, 1e-15);
}

TEST(CrossNoise, ChiNeedsLinearPotential) {
  EXPECT_THROW(cross_noise(CrossKind::Chi, Vec3{1, 0, 0}, Vec3{0, 1, 0}, diag123()), ValidationError);
}

TEST(Analytic, Examples) {
  const std::vector<double> flat{0.2, 0.2, 0.2};
  for (const Vec3& v : analytic_isotropic({1, 2, 3}, {0, 0, 1}, flat)) EXPECT_EQ(v, (Vec3{1, 2, 3}));
  const std::vector<double> ramp{0.0, 0.5};
  const auto out = analytic_isotropic({1, 0, 0}, {0, 0, 1}, ramp);
  EXPECT_EQ(out.back(), (Vec3{1, 0, 0.5}));
}

TEST(Analytic, MatchesIsotropicTypeIPath) {
  SuslovParams p{InertiaTensor::diagonal(2.0, 2.0, 2.0), {0.0, 0.6, 0.8}, Potential::zero()};
  const auto f = type1_field(p, ScalarNoise::ornstein_uhlenbeck(1.0, 0.5));
  const Vec3 om0{1.0, 0.8, -0.6};
  const std::vector<double> x0{om0.x, om0.y, om0.z, 0, 0, 1, 0.0};
  const auto tr = sde::integrate(f, x0, sde::wiener_path(17, 2000, 1e-3));
  std::vector<double> n_path;
  for (std::size_t i = 0; i < tr.size(); ++i) n_path.push_back(tr.state(i)[6]);
  const auto exact = analytic_isotropic(om0, p.axis, n_path);
  for (std::size_t i = 0; i < tr.size(); ++i) EXPECT_LE(norm(load3(tr.state(i), 0) - exact[i]), 1e-10);
}

TEST(Kharlamova, RateMatchesFieldDerivative) {
  const InertiaTensor inertia = InertiaTensor::diagonal(1.0, 2.0, 3.0);
  const Vec3 chi{0.5, 0.3, 0.0};
  const auto p = SuslovParams{inertia, {0, 0, 1}, Potential::linear(chi)};
  const auto f = type1_field(p, ScalarNoise::constant());
  const Vec3 om{0.7, -0.4, 0.25};
  const Vec3 ga{0.0, 0.6, 0.8};
  const double n = 0.25;
  const Vec3 dom = drift_omega(f, {om.x, om.y, om.z, ga.x, ga.y, ga.z, n});
  EXPECT_NEAR(dot(inertia.apply(dom), chi), kharlamova_rate(inertia, chi, om, n), 1e-14);
}

TEST(EnergyDrift, CoefficientsMatchField) {
  const auto p = diag123(Potential::linear({0.5, 0.3, 0.0}));
  const auto f = type1_field(p, ScalarNoise::ornstein_uhlenbeck(1.0, 0.5));
  const std::vector<double> x{0.4, -0.3, 0.2, 0.0, 0.6, 0.8, 0.2};
  const auto [cdt, cdn] = energy_drift_coefficients(p, x);
  const auto d = f.drift(x);
  const auto b = f.diffusion(x);
  // dE = I Omega . dOmega + chi . dGamma, split into dt and dW parts.
  const Vec3 iom = p.inertia.apply(load3(x, 0));
  const double e_dt = dot(iom, load3(d, 0)) + dot(p.potential.chi, load3(d, 3));
  const double e_dw = dot(iom, load3(b, 0));
  EXPECT_NEAR(e_dt, cdt + cdn * d[6], 1e-14);
  EXPECT_NEAR(e_dw, cdn * b[6], 1e-14);
}
