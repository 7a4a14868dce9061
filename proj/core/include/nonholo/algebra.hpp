#pragma once

// Small fixed-size linear algebra for body-frame rigid body mechanics.
//
// Convention: Mat3 is stored row-major, m(i, j) is row i / column j, and
// Mat3 * Vec3 is the usual matrix-vector product. transpose(A) * v is
// written explicitly wherever a transposed map appears (e.g. alpha^T).

#include <array>
#include <cmath>
#include <span>

namespace nonholo {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
  constexpr double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }

  constexpr Vec3& operator+=(const Vec3& o) {
    x += o.x; y += o.y; z += o.z;
    return *this;
  }
  constexpr Vec3& operator-=(const Vec3& o) {
    x -= o.x; y -= o.y; z -= o.z;
    return *this;
  }
  constexpr Vec3& operator*=(double s) {
    x *= s; y *= s; z *= s;
    return *this;
  }

  static constexpr Vec3 unit(int i) {
    Vec3 v;
    v[i] = 1.0;
    return v;
  }

  friend constexpr bool operator==(const Vec3&, const Vec3&) = default;
};

constexpr Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
constexpr Vec3 operator-(Vec3 a, const Vec3& b) { return a -= b; }
constexpr Vec3 operator-(const Vec3& a) { return {-a.x, -a.y, -a.z}; }
constexpr Vec3 operator*(double s, Vec3 a) { return a *= s; }
constexpr Vec3 operator*(Vec3 a, double s) { return a *= s; }
constexpr Vec3 operator/(const Vec3& a, double s) { return {a.x / s, a.y / s, a.z / s}; }

constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

inline bool is_finite(const Vec3& a) {
  return std::isfinite(a.x) && std::isfinite(a.y) && std::isfinite(a.z);
}

inline Vec3 load3(std::span<const double> s, std::size_t offset = 0) {
  return {s[offset], s[offset + 1], s[offset + 2]};
}

inline void store3(const Vec3& v, std::span<double> s, std::size_t offset = 0) {
  s[offset] = v.x;
  s[offset + 1] = v.y;
  s[offset + 2] = v.z;
}

struct Mat3 {
  std::array<double, 9> m{};

  constexpr double operator()(int i, int j) const { return m[static_cast<std::size_t>(3 * i + j)]; }
  constexpr double& operator()(int i, int j) { return m[static_cast<std::size_t>(3 * i + j)]; }

  static constexpr Mat3 zero() { return {}; }
  static constexpr Mat3 identity() { return diagonal(1.0, 1.0, 1.0); }
  static constexpr Mat3 diagonal(double a, double b, double c) {
    Mat3 r;
    r(0, 0) = a;
    r(1, 1) = b;
    r(2, 2) = c;
    return r;
  }
  static constexpr Mat3 from_rows(const Vec3& r0, const Vec3& r1, const Vec3& r2) {
    return {{r0.x, r0.y, r0.z, r1.x, r1.y, r1.z, r2.x, r2.y, r2.z}};
  }

  constexpr Vec3 row(int i) const { return {(*this)(i, 0), (*this)(i, 1), (*this)(i, 2)}; }
  constexpr Vec3 col(int j) const { return {(*this)(0, j), (*this)(1, j), (*this)(2, j)}; }

  constexpr Mat3& operator+=(const Mat3& o) {
    for (std::size_t k = 0; k < 9; ++k) m[k] += o.m[k];
    return *this;
  }
  constexpr Mat3& operator-=(const Mat3& o) {
    for (std::size_t k = 0; k < 9; ++k) m[k] -= o.m[k];
    return *this;
  }
  constexpr Mat3& operator*=(double s) {
    for (auto& v : m) v *= s;
    return *this;
  }

  friend constexpr bool operator==(const Mat3&, const Mat3&) = default;
};

constexpr Mat3 operator+(Mat3 a, const Mat3& b) { return a += b; }
constexpr Mat3 operator-(Mat3 a, const Mat3& b) { return a -= b; }
constexpr Mat3 operator*(double s, Mat3 a) { return a *= s; }
constexpr Mat3 operator*(Mat3 a, double s) { return a *= s; }

constexpr Vec3 operator*(const Mat3& a, const Vec3& v) {
  return {a(0, 0) * v.x + a(0, 1) * v.y + a(0, 2) * v.z,
          a(1, 0) * v.x + a(1, 1) * v.y + a(1, 2) * v.z,
          a(2, 0) * v.x + a(2, 1) * v.y + a(2, 2) * v.z};
}

constexpr Mat3 operator*(const Mat3& a, const Mat3& b) {
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r(i, j) = a(i, 0) * b(0, j) + a(i, 1) * b(1, j) + a(i, 2) * b(2, j);
  return r;
}

constexpr Mat3 transpose(const Mat3& a) {
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r(i, j) = a(j, i);
  return r;
}

constexpr Mat3 outer(const Vec3& a, const Vec3& b) {
  return Mat3::from_rows(a.x * b, a.y * b, a.z * b);
}

constexpr double determinant(const Mat3& a) {
  return a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) -
         a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0)) +
         a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
}

/// Transposed cofactor matrix; adjugate(A) * A = det(A) * Id.
constexpr Mat3 adjugate(const Mat3& a) {
  Mat3 r;
  r(0, 0) = a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1);
  r(0, 1) = a(0, 2) * a(2, 1) - a(0, 1) * a(2, 2);
  r(0, 2) = a(0, 1) * a(1, 2) - a(0, 2) * a(1, 1);
  r(1, 0) = a(1, 2) * a(2, 0) - a(1, 0) * a(2, 2);
  r(1, 1) = a(0, 0) * a(2, 2) - a(0, 2) * a(2, 0);
  r(1, 2) = a(0, 2) * a(1, 0) - a(0, 0) * a(1, 2);
  r(2, 0) = a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0);
  r(2, 1) = a(0, 1) * a(2, 0) - a(0, 0) * a(2, 1);
  r(2, 2) = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
  return r;
}

double frobenius_norm(const Mat3& a);

/// Hat map R^3 -> so(3) with hat(a)_ij = -eps_ijk a_k, so hat(a) * b = a x b.
constexpr Mat3 hat(const Vec3& a) {
  return {{0.0, -a.z, a.y, a.z, 0.0, -a.x, -a.y, a.x, 0.0}};
}

/// Inverse of hat. Throws NotAntisymmetric when the symmetric part of m is
/// larger than 1e-12 relative to the norm of m.
Vec3 unhat(const Mat3& m);

/// Matrix commutator [a, b] = ab - ba.
constexpr Mat3 commutator(const Mat3& a, const Mat3& b) { return a * b - b * a; }

/// Symmetric positive definite inertia tensor with a cached inverse.
///
/// The inverse is formed from the adjugate and determinant; diagonal tensors
/// take a componentwise fast path in apply() and solve().
class InertiaTensor {
 public:
  /// Throws SingularInertia unless m is symmetric and positive definite.
  explicit InertiaTensor(const Mat3& m);

  static InertiaTensor diagonal(double i1, double i2, double i3);
  static InertiaTensor isotropic(double i0) { return diagonal(i0, i0, i0); }

  Vec3 apply(const Vec3& v) const {
    if (diagonal_) return {m_(0, 0) * v.x, m_(1, 1) * v.y, m_(2, 2) * v.z};
    return m_ * v;
  }
  Vec3 solve(const Vec3& v) const {
    if (diagonal_) return {v.x / m_(0, 0), v.y / m_(1, 1), v.z / m_(2, 2)};
    return inverse_ * v;
  }

  const Mat3& matrix() const { return m_; }
  const Mat3& inverse() const { return inverse_; }
  double det() const { return det_; }
  bool is_diagonal() const { return diagonal_; }
  bool is_isotropic() const;

  /// Principal moment along body axis i (diagonal entry).
  double moment(int i) const { return m_(i, i); }

  friend bool operator==(const InertiaTensor& a, const InertiaTensor& b) { return a.m_ == b.m_; }

 private:
  Mat3 m_;
  Mat3 inverse_;
  double det_ = 0.0;
  bool diagonal_ = false;
};

inline Vec3 apply_inertia(const InertiaTensor& inertia, const Vec3& v) { return inertia.apply(v); }
inline Vec3 solve_inertia(const InertiaTensor& inertia, const Vec3& v) { return inertia.solve(v); }

}  // namespace nonholo
