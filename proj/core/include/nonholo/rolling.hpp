#pragma once

// Rolling-ball-type systems on SE(3), already reduced to (Omega, Y, Gamma).
// Reduced Lagrangian l = 1/2 Omega . I Omega + 1/2 m |Y|^2 - U(Gamma) and
// constraint Y = alpha(Gamma) Omega. The equations of motion read
//   d(I Omega) + Omega x I Omega dt + alpha^T (m dY + Omega x m Y dt) = Gamma x dU/dGamma dt
//   dGamma = Gamma x Omega dt
// (the Y x mY term vanishes identically for this Lagrangian).
//
// Type I:  Y = alpha(Gamma) Omega + N,          N in R^3, dN = f dt + sigma o dW
// Type II: Y = alpha~(Gamma, Nt) Omega,         Nt in R^p, dNt = f dt + sigma o dW
//
// State layouts: deterministic (om[3], ga[3]); type I (om[3], ga[3], n[3]);
// type II (om[3], ga[3], nt[p]).

#include <functional>
#include <span>
#include <vector>

#include "nonholo/algebra.hpp"
#include "nonholo/sde.hpp"
#include "nonholo/suslov.hpp"

namespace nonholo::rolling {

using AlphaFn = std::function<Mat3(const Vec3& gamma)>;
using AlphaTildeFn = std::function<Mat3(const Vec3& gamma, std::span<const double> nt)>;

struct RollingParams {
  InertiaTensor inertia = InertiaTensor::diagonal(1.0, 1.0, 1.0);
  double mass = 1.0;
  AlphaFn alpha;
  AlphaTildeFn alpha_tilde;  ///< type II only
  std::size_t noise_dim = 1;  ///< p, type II only
  suslov::Potential potential;
  /// Step of the directional finite differences of alpha and alpha~.
  double fd_step = 1e-6;
};

/// alpha = r Id.
AlphaFn constant_alpha(double r);
/// alpha = r hat(Gamma): Y = r Gamma x Omega.
AlphaFn skew_alpha(double r);
/// alpha~ = (r + Nt_0) Id.
AlphaTildeFn shifted_alpha(double r);

/// Throws ValidationError for m <= 0 or a missing alpha closure.
void validate(const RollingParams& params, bool type2 = false);

/// Effective mass K = I + m alpha^T alpha; throws EffectiveMassSingular
/// unless K is symmetric positive definite.
Mat3 effective_mass(const RollingParams& params, const Mat3& alpha);

/// Directional derivative D alpha(Gamma)[v] by central differences.
Mat3 alpha_derivative(const RollingParams& params, const Vec3& gamma, const Vec3& v);

struct Rates {
  Vec3 omega;
  Vec3 gamma;
};

/// Deterministic right-hand side with Y = alpha(Gamma) Omega eliminated.
Rates det_rhs(const RollingParams& params, const Vec3& omega, const Vec3& gamma);
sde::StratonovichField det_field(const RollingParams& params);

/// Noise closures f, sigma over (Omega, Y, Gamma, N). Output has the size of N.
struct NoiseModel {
  using Fn = std::function<void(const Vec3& omega, const Vec3& y, const Vec3& gamma, std::span<const double> n,
                                std::span<double> out)>;
  Fn drift;
  Fn diffusion;

  /// f = 0, sigma = s.
  static NoiseModel additive(std::vector<double> sigma);
  /// f = -theta N, sigma = s.
  static NoiseModel ornstein_uhlenbeck(double theta, std::vector<double> sigma);
};

/// (I + m alpha^T alpha) dOmega = [-Omega x I Omega + Gamma x dU
///     - m alpha^T (D alpha[Gamma x Omega] Omega + Omega x Y)] dt - m alpha^T dN.
sde::StratonovichField type1_field(const RollingParams& params, NoiseModel noise);

/// As type I with N = 0 and the extra increment m alpha~^T (d alpha~/dNt_j Omega) dNt_j.
sde::StratonovichField type2_field(const RollingParams& params, NoiseModel noise);

Vec3 reconstruct_y_type1(const RollingParams& params, std::span<const double> state);
Vec3 reconstruct_y_type2(const RollingParams& params, std::span<const double> state);

/// E = 1/2 Omega . I Omega + 1/2 m |Y|^2 + U(Gamma).
double energy(const RollingParams& params, const Vec3& omega, const Vec3& y, const Vec3& gamma);

/// (m dY + Omega x m Y dt) . N for the supplied increments.
double energy_drift_rhs(const RollingParams& params, const Vec3& omega, const Vec3& y, const Vec3& n,
                        const Vec3& dy, double dt);

}  // namespace nonholo::rolling
