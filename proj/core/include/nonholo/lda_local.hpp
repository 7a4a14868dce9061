#pragma once

// Stochastic Lagrange-d'Alembert systems in adapted local coordinates
// q = (r^alpha, s^a) for quadratic Lagrangians L = 1/2 qdot^T M(q) qdot - V(q).
//
// Constraint one-form: omega^a = ds^a + A^a_alpha dr^alpha.
//   affine (type I):  w^a + A^a_alpha(r, s) u^alpha = N^a,  N in R^m
//   ideal  (type II): w^a + A~^a_alpha(r, s, N) u^alpha = 0,  N in R^p
// with u = rdot, w = sdot and dN = F dt + Sigma o dW (one Wiener channel).
//
// State layout of the assembled fields: (r[k], s[m], u[k], N[p]), k = n - m.
// The velocity equation is obtained from the constrained-Lagrangian form
//   d(dLc/du) - dLc/dr dt + A dLc/ds dt = -dL/dw (B u + [I] dA/ds N) dt - [II] dL/dw dA~/dN dN
// by expanding d(dLc/du) with the chain rule and solving the resulting
// linear system with the Hessian d2Lc/du du = S^T M S, S = [Id; -A].

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "nonholo/sde.hpp"

namespace nonholo::lda {

enum class ConstraintKind { Affine, Ideal };

struct ChartSystem {
  std::size_t n = 0;  ///< configuration dimension
  std::size_t m = 0;  ///< number of constraints
  std::size_t p = 0;  ///< noise dimension; must equal m for affine constraints

  /// M(q), n x n row-major, symmetric positive definite.
  std::function<void(std::span<const double> q, std::span<double> mass)> mass;
  std::function<double(std::span<const double> q)> potential;
  /// A^a_alpha at out[a * k + alpha]. The noise argument is empty for the
  /// affine kind and holds N for the ideal kind.
  std::function<void(std::span<const double> q, std::span<const double> noise, std::span<double> out)> coefficients;
  /// F and Sigma evaluated on the full velocity v = (u, w); p values each.
  std::function<void(std::span<const double> q, std::span<const double> v, std::span<const double> noise,
                     std::span<double> out)>
      noise_drift;
  std::function<void(std::span<const double> q, std::span<const double> v, std::span<const double> noise,
                     std::span<double> out)>
      noise_diffusion;
  /// Optional chart domain; evaluation outside throws ChartDomain.
  std::function<bool(std::span<const double> q)> domain;

  /// Relative finite-difference step: h = fd_step * (1 + |x|).
  double fd_step = 1e-6;
  /// Largest accepted condition number of the velocity Hessian.
  double max_condition = 1e12;

  std::size_t free_dim() const { return n - m; }
  /// Size of the state vector (r, s, u, N).
  std::size_t state_dim() const { return n + (n - m) + p; }
};

/// Offsets into the (r, s, u, N) state vector.
struct StateView {
  std::span<const double> q, u, noise;
};
StateView split_state(const ChartSystem& sys, std::span<const double> x);

/// B^b_{alpha beta} = dA^b_alpha/dr^beta - dA^b_beta/dr^alpha
///                  + A^a_alpha dA^b_beta/ds^a - A^a_beta dA^b_alpha/ds^a,
/// stored at out[(b * k + alpha) * k + beta]. Pass the noise value for
/// ideal constraints (A~ depends on it) and an empty span otherwise.
std::vector<double> b_coefficients(const ChartSystem& sys, std::span<const double> q,
                                   std::span<const double> noise = {});

/// Constrained velocity v = (u, N - A u) (affine) or (u, -A~ u) (ideal).
std::vector<double> constrained_velocity(const ChartSystem& sys, ConstraintKind kind, std::span<const double> q,
                                         std::span<const double> u, std::span<const double> noise);

/// Lc(r, s, u, N) = L(q, constrained_velocity(...)).
double constrained_lagrangian(const ChartSystem& sys, ConstraintKind kind, std::span<const double> q,
                              std::span<const double> u, std::span<const double> noise);

/// E(q, v) = <dL/dv, v> - L = 1/2 v^T M v + V.
double energy(const ChartSystem& sys, std::span<const double> q, std::span<const double> v);

/// omega(q) . v - N (affine) or omega~(q, N) . v (ideal); m values.
std::vector<double> constraint_residual(const ChartSystem& sys, ConstraintKind kind, std::span<const double> q,
                                        std::span<const double> v, std::span<const double> noise);

/// Throws on invalid dimensions or missing closures.
void validate(const ChartSystem& sys, ConstraintKind kind);

sde::StratonovichField type1_field(std::shared_ptr<const ChartSystem> sys);
sde::StratonovichField type2_field(std::shared_ptr<const ChartSystem> sys);

/// Free particle in R^3 with the nonholonomic constraint zdot = y xdot,
/// coordinates r = (x, y), s = z, A = (-y, 0). For the ideal kind the
/// coefficients become A~ = (-y - N, 0). Noise is Ornstein-Uhlenbeck
/// dN = -theta N dt + sigma o dW.
ChartSystem nonholonomic_particle(ConstraintKind kind, double theta, double sigma);

}  // namespace nonholo::lda
