#pragma once

// The Suslov rigid body with a fixed point: constraint a . Omega = 0 with the
// body-fixed vector a, Lagrangian l = 1/2 I Omega . Omega - U(Gamma), and
// advected direction dGamma = Gamma x Omega dt.
//
// Two stochastic deformations of the constraint are provided:
//   type I  (affine): a . Omega = N,      dN = f dt + sigma o dW   (N scalar)
//   type II (ideal):  N . Omega = 0,      dN = f dt + sigma o dW   (N in R^3)
// Type II preserves the energy E = 1/2 I Omega . Omega + U(Gamma) pathwise.
//
// State layouts: deterministic (om[3], ga[3]); type I (om[3], ga[3], n);
// type II (om[3], ga[3], n[3]).

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "nonholo/algebra.hpp"
#include "nonholo/sde.hpp"

namespace nonholo::suslov {

inline constexpr std::size_t kDetDim = 6;
inline constexpr std::size_t kTypeIDim = 7;
inline constexpr std::size_t kTypeIIDim = 9;

struct Potential {
  enum class Kind { Zero, Linear, QuadraticCT };

  Kind kind = Kind::Zero;
  Vec3 chi{};            ///< U = chi . Gamma (Linear)
  double epsilon = 0.0;  ///< U = eps/2 I Gamma . Gamma (QuadraticCT)

  static Potential zero() { return {}; }
  static Potential linear(const Vec3& chi) { return {Kind::Linear, chi, 0.0}; }
  static Potential quadratic_ct(double eps) { return {Kind::QuadraticCT, {}, eps}; }

  double value(const InertiaTensor& inertia, const Vec3& gamma) const;
  Vec3 gradient(const InertiaTensor& inertia, const Vec3& gamma) const;

  friend bool operator==(const Potential&, const Potential&) = default;
};

struct SuslovParams {
  InertiaTensor inertia = InertiaTensor::diagonal(1.0, 1.0, 1.0);
  Vec3 axis{0.0, 0.0, 1.0};
  Potential potential;
};

/// Throws ValidationError when |a| == 0.
void validate(const SuslovParams& params);

struct StateI {
  Vec3 omega;
  Vec3 gamma;
  double n = 0.0;

  std::vector<double> to_vector() const;
  static StateI from(std::span<const double> x);
};

struct StateII {
  Vec3 omega;
  Vec3 gamma;
  Vec3 n;

  std::vector<double> to_vector() const;
  static StateII from(std::span<const double> x);
};

/// Checks a . Omega = N and |Gamma| = 1 within `tol`; throws ConstraintViolated.
StateI make_state_i(const SuslovParams& params, const Vec3& omega, const Vec3& gamma, double n, double tol = 1e-9);
/// Checks N . Omega = 0 and |Gamma| = 1 within `tol`; throws ConstraintViolated.
StateII make_state_ii(const Vec3& omega, const Vec3& gamma, const Vec3& n, double tol = 1e-9);

/// Scalar noise dN = f dt + sigma o dW for the affine constraint.
struct ScalarNoise {
  enum class Kind { Constant, OrnsteinUhlenbeck, Generic };
  using Fn = std::function<double(const Vec3& omega, const Vec3& gamma, double n)>;

  Kind kind = Kind::Constant;
  Fn drift;
  Fn diffusion;

  /// N stays at its initial value (inhomogeneous Suslov problem).
  static ScalarNoise constant();
  /// f = -theta N, sigma = sigma0.
  static ScalarNoise ornstein_uhlenbeck(double theta, double sigma0);
  static ScalarNoise generic(Fn f, Fn sigma);
};

/// Vector noise dN = f dt + sigma o dW for the ideal constraint.
struct VectorNoise {
  enum class Kind { Constant, OrnsteinUhlenbeck, Generic, CrossChi, CrossGamma, CrossMomentum };
  using Fn = std::function<Vec3(const Vec3& omega, const Vec3& gamma, const Vec3& n)>;

  Kind kind = Kind::Constant;
  Fn drift;
  Fn diffusion;

  static VectorNoise constant();
  /// f = -theta N, sigma = sigma0 * direction.
  static VectorNoise ornstein_uhlenbeck(double theta, const Vec3& sigma);
  static VectorNoise generic(Fn f, Fn sigma);
};

enum class CrossKind { Chi, Gamma, Momentum };

/// dN = (g x c) dt + (eta x c) o dW with c = chi, Gamma or I Omega. The
/// emitted f and sigma are orthogonal to c everywhere.
VectorNoise cross_noise(CrossKind kind, VectorNoise::Fn g, VectorNoise::Fn eta, const SuslovParams& params);
/// Constant g and eta.
VectorNoise cross_noise(CrossKind kind, const Vec3& g, const Vec3& eta, const SuslovParams& params);

/// Deterministic multiplier
///   lambda = ((Omega x I Omega + dU/dGamma x Gamma) . I^-1 a) / (a . I^-1 a).
double lambda_det(const SuslovParams& params, const Vec3& omega, const Vec3& gamma);

struct Rates {
  Vec3 omega;
  Vec3 gamma;
};

/// I dOmega/dt = -Omega x I Omega + Gamma x dU/dGamma + lambda a, dGamma/dt = Gamma x Omega.
/// Throws ConstraintViolated when |a . Omega| > 1e-9.
Rates det_rhs(const SuslovParams& params, const Vec3& omega, const Vec3& gamma);

/// Deterministic field over (Omega, Gamma). No constraint check at evaluation.
sde::StratonovichField det_field(const SuslovParams& params);

/// Affine stochastic constraint over (Omega, Gamma, N):
///   I dOmega = (-Omega x I Omega + Gamma x dU/dGamma) dt + a lambda dt,
///   lambda dt = ((Omega x I Omega + dU/dGamma x Gamma) . I^-1 a dt + dN) / (a . I^-1 a).
sde::StratonovichField type1_field(const SuslovParams& params, ScalarNoise noise);

/// Ideal stochastic constraint over (Omega, Gamma, N):
///   I dOmega = (-Omega x I Omega + Gamma x dU/dGamma) dt + N lambda dt,
///   lambda dt = ((Omega x I Omega + dU/dGamma x Gamma) . I^-1 N dt - Omega . dN) / (N . I^-1 N).
/// Throws NoiseSingular when |N| < noise_floor.
sde::StratonovichField type2_field(const SuslovParams& params, VectorNoise noise, double noise_floor);

/// Smallest admissible |N| for a path started at N0: 1e-8 (1 + |N0|).
inline double noise_floor_for(const Vec3& n0) { return 1e-8 * (1.0 + norm(n0)); }

enum class ConstraintType { Deterministic, I, II };

/// Integrals of motion evaluated at one state.
struct InvariantsReport {
  double energy = 0.0;      ///< 1/2 I Omega . Omega + U(Gamma)
  double gamma_norm = 0.0;  ///< Gamma . Gamma
  double constraint = 0.0;  ///< a . Omega - N (I, deterministic: N = 0) or N . Omega (II)
  double lagrange = 0.0;    ///< I Omega . Gamma
  std::optional<double> momentum_square;    ///< 1/2 I Omega . I Omega (U = 0)
  std::optional<double> kharlamova;         ///< I Omega . chi (Linear)
  std::optional<double> clebsch_tisserand;  ///< 1/2 I Omega . I Omega - 1/2 A Gamma . Gamma (QuadraticCT)
};

/// A = eps I^-1 det(I) for the Clebsch-Tisserand integral.
Mat3 clebsch_tisserand_matrix(const SuslovParams& params);

InvariantsReport invariants_report(const SuslovParams& params, std::span<const double> state, ConstraintType type);

/// Looks up one report entry by name (energy, gamma_norm, constraint,
/// lagrange, momentum_square, kharlamova, clebsch_tisserand).
std::optional<double> invariant_by_name(const InvariantsReport& report, std::string_view name);

/// Omega(t) = Omega0 + a / |a|^2 (N(t) - N0) for isotropic inertia and U = 0.
std::vector<Vec3> analytic_isotropic(const Vec3& omega0, const Vec3& axis, std::span<const double> n_path);

/// dE for the affine constraint: dE = N lambda dt = N (c dt + dN) / (a . I^-1 a)
/// with c = (Omega x I Omega + dU/dGamma x Gamma) . I^-1 a. Returns the
/// coefficients (N c / (a . I^-1 a), N / (a . I^-1 a)) of dt and dN.
std::pair<double, double> energy_drift_coefficients(const SuslovParams& params, std::span<const double> state_i);

/// chi1 (I2 - I3) Omega2 N + chi2 (I3 - I1) Omega1 N: the rate of I Omega . chi
/// under the affine constraint with a = e3, diagonal inertia and chi . a = 0.
double kharlamova_rate(const InertiaTensor& inertia, const Vec3& chi, const Vec3& omega, double n);

}  // namespace nonholo::suslov
