#include <gtest/gtest.h>

#include <random>

#include "nonholo/algebra.hpp"
#include "nonholo/errors.hpp"

using namespace nonholo;

namespace {

Vec3 random_vec(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  return {u(rng), u(rng), u(rng)};
}

// Cofactor expansion written out independently of the library.
Mat3 inverse_oracle(const Mat3& a) {
  const double det = a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) -
                     a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0)) +
                     a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
  Mat3 inv;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const int r0 = (j + 1) % 3, r1 = (j + 2) % 3, c0 = (i + 1) % 3, c1 = (i + 2) % 3;
      inv.m[3 * i + j] = (a(r0, c0) * a(r1, c1) - a(r0, c1) * a(r1, c0)) / det;
    }
  }
  return inv;
}

}  // namespace

TEST(Algebra, HatOfUnitZ) {
  const Mat3 h = hat({0, 0, 1});
  const Mat3 expected = Mat3::from_rows({0, -1, 0}, {1, 0, 0}, {0, 0, 0});
  EXPECT_EQ(h, expected);
}

TEST(Algebra, HatOfZeroIsZero) { EXPECT_EQ(hat({0, 0, 0}), Mat3::zero()); }

TEST(Algebra, HatActsAsCrossProduct) {
  const Vec3 r = hat({1, 2, 3}) * Vec3{4, 5, 6};
  EXPECT_EQ(r, (Vec3{-3, 6, -3}));
}

TEST(Algebra, UnhatRoundTrip) {
  EXPECT_EQ(unhat(hat({1, 2, 3})), (Vec3{1, 2, 3}));
  EXPECT_EQ(unhat(Mat3::zero()), (Vec3{0, 0, 0}));
}

TEST(Algebra, UnhatRejectsSymmetric) {
  const Mat3 s = Mat3::from_rows({1, 2, 0}, {2, 1, 0}, {0, 0, 3});
  try {
    (void)unhat(s);
    FAIL() << "expected NotAntisymmetric";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotAntisymmetric);
  }
}

TEST(Algebra, HatPropertiesOnRandomPairs) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 1000; ++i) {
    const Vec3 a = random_vec(rng), b = random_vec(rng);
    const Vec3 lhs = hat(a) * b, rhs = cross(a, b);
    EXPECT_LE(std::abs(lhs.x - rhs.x), 1e-14);
    EXPECT_LE(std::abs(lhs.y - rhs.y), 1e-14);
    EXPECT_LE(std::abs(lhs.z - rhs.z), 1e-14);
    EXPECT_LE(frobenius_norm(commutator(hat(a), hat(b)) - hat(cross(a, b))), 1e-13);
    EXPECT_EQ(hat(a) + transpose(hat(a)), Mat3::zero());
  }
}

TEST(Algebra, InertiaApplyAndSolve) {
  const auto I = InertiaTensor::diagonal(1, 2, 3);
  EXPECT_EQ(apply_inertia(I, {1, 1, 1}), (Vec3{1, 2, 3}));
  const Vec3 s = solve_inertia(I, {0, 0, 1});
  EXPECT_DOUBLE_EQ(s.z, 1.0 / 3.0);
  EXPECT_EQ(s.x, 0.0);
  EXPECT_EQ(s.y, 0.0);
}

TEST(Algebra, FullInertiaRoundTripAgainstCofactorInverse) {
  const Mat3 m = Mat3::from_rows({4, 1, 0.5}, {1, 3, 0.2}, {0.5, 0.2, 2});
  const InertiaTensor I(m);
  const Mat3 oracle = inverse_oracle(m);
  std::mt19937_64 rng(5);
  for (int i = 0; i < 100; ++i) {
    const Vec3 v = random_vec(rng);
    const Vec3 back = solve_inertia(I, apply_inertia(I, v));
    EXPECT_LE(norm(back - v), 1e-12 * norm(v));
    const Vec3 direct = oracle * v;
    EXPECT_LE(norm(solve_inertia(I, v) - direct), 1e-12 * norm(direct));
  }
}

TEST(Algebra, InertiaRejectsIndefiniteOrAsymmetric) {
  EXPECT_THROW(InertiaTensor::diagonal(1, -2, 3), Error);
  EXPECT_THROW(InertiaTensor::diagonal(1, 0, 3), Error);
  EXPECT_THROW(InertiaTensor(Mat3::from_rows({1, 0.5, 0}, {0, 1, 0}, {0, 0, 1})), Error);
  try {
    (void)InertiaTensor::diagonal(1, -2, 3);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SingularInertia);
  }
}
