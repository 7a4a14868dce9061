#include "nonholo/algebra.hpp"

#include <string>

#include "nonholo/errors.hpp"

namespace nonholo {

double frobenius_norm(const Mat3& a) {
  double s = 0.0;
  for (double v : a.m) s += v * v;
  return std::sqrt(s);
}

Vec3 unhat(const Mat3& m) {
  const Mat3 sym = 0.5 * (m + transpose(m));
  const double scale = frobenius_norm(m);
  if (frobenius_norm(sym) > 1e-12 * scale) {
    throw Error(ErrorCode::NotAntisymmetric,
                "symmetric part has norm " + std::to_string(frobenius_norm(sym)));
  }
  // Average the two copies of each component to absorb roundoff.
  const Mat3 skew = 0.5 * (m - transpose(m));
  return {skew(2, 1), skew(0, 2), skew(1, 0)};
}

InertiaTensor::InertiaTensor(const Mat3& m) : m_(m) {
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      if (!std::isfinite(m(i, j))) throw Error(ErrorCode::SingularInertia, "non-finite entry");
    }
  }
  const double scale = frobenius_norm(m);
  for (int i = 0; i < 3; ++i) {
    for (int j = i + 1; j < 3; ++j) {
      if (std::abs(m(i, j) - m(j, i)) > 1e-14 * scale) {
        throw Error(ErrorCode::SingularInertia, "inertia tensor is not symmetric");
      }
    }
  }
  // Sylvester's criterion on the leading principal minors.
  const double d1 = m(0, 0);
  const double d2 = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  det_ = determinant(m);
  if (!(d1 > 0.0) || !(d2 > 0.0) || !(det_ > 0.0)) {
    throw Error(ErrorCode::SingularInertia, "inertia tensor is not positive definite");
  }
  inverse_ = (1.0 / det_) * adjugate(m);
  diagonal_ = m(0, 1) == 0.0 && m(0, 2) == 0.0 && m(1, 0) == 0.0 && m(1, 2) == 0.0 &&
              m(2, 0) == 0.0 && m(2, 1) == 0.0;
}

InertiaTensor InertiaTensor::diagonal(double i1, double i2, double i3) {
  return InertiaTensor(Mat3::diagonal(i1, i2, i3));
}

bool InertiaTensor::is_isotropic() const {
  return diagonal_ && m_(0, 0) == m_(1, 1) && m_(1, 1) == m_(2, 2);
}

}  // namespace nonholo
