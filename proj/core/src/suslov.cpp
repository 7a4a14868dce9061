#include "nonholo/suslov.hpp"

#include <cmath>
#include <string>

#include "nonholo/errors.hpp"

namespace nonholo::suslov {

double Potential::value(const InertiaTensor& inertia, const Vec3& gamma) const {
  switch (kind) {
    case Kind::Zero: return 0.0;
    case Kind::Linear: return dot(chi, gamma);
    case Kind::QuadraticCT: return 0.5 * epsilon * dot(inertia.apply(gamma), gamma);
  }
  return 0.0;
}

Vec3 Potential::gradient(const InertiaTensor& inertia, const Vec3& gamma) const {
  switch (kind) {
    case Kind::Zero: return {};
    case Kind::Linear: return chi;
    case Kind::QuadraticCT: return epsilon * inertia.apply(gamma);
  }
  return {};
}

void validate(const SuslovParams& params) {
  if (!(norm(params.axis) > 0.0) || !is_finite(params.axis)) {
    throw ValidationError("axis", "constraint axis must be a finite non-zero vector");
  }
}

std::vector<double> StateI::to_vector() const {
  return {omega.x, omega.y, omega.z, gamma.x, gamma.y, gamma.z, n};
}

StateI StateI::from(std::span<const double> x) { return {load3(x, 0), load3(x, 3), x[6]}; }

std::vector<double> StateII::to_vector() const {
  return {omega.x, omega.y, omega.z, gamma.x, gamma.y, gamma.z, n.x, n.y, n.z};
}

StateII StateII::from(std::span<const double> x) { return {load3(x, 0), load3(x, 3), load3(x, 6)}; }

namespace {

void check_gamma(const Vec3& gamma, double tol) {
  if (std::abs(dot(gamma, gamma) - 1.0) > tol) {
    throw Error(ErrorCode::ConstraintViolated, "|Gamma| must be 1 at construction");
  }
}

}  // namespace

StateI make_state_i(const SuslovParams& params, const Vec3& omega, const Vec3& gamma, double n, double tol) {
  if (std::abs(dot(params.axis, omega) - n) > tol) {
    throw Error(ErrorCode::ConstraintViolated, "a . Omega differs from N by " +
                                                   std::to_string(dot(params.axis, omega) - n));
  }
  check_gamma(gamma, tol);
  return {omega, gamma, n};
}

StateII make_state_ii(const Vec3& omega, const Vec3& gamma, const Vec3& n, double tol) {
  if (std::abs(dot(n, omega)) > tol) {
    throw Error(ErrorCode::ConstraintViolated, "N . Omega = " + std::to_string(dot(n, omega)));
  }
  check_gamma(gamma, tol);
  return {omega, gamma, n};
}

ScalarNoise ScalarNoise::constant() {
  auto zero = [](const Vec3&, const Vec3&, double) { return 0.0; };
  return {Kind::Constant, zero, zero};
}

ScalarNoise ScalarNoise::ornstein_uhlenbeck(double theta, double sigma0) {
  return {Kind::OrnsteinUhlenbeck, [theta](const Vec3&, const Vec3&, double n) { return -theta * n; },
          [sigma0](const Vec3&, const Vec3&, double) { return sigma0; }};
}

ScalarNoise ScalarNoise::generic(Fn f, Fn sigma) { return {Kind::Generic, std::move(f), std::move(sigma)}; }

VectorNoise VectorNoise::constant() {
  auto zero = [](const Vec3&, const Vec3&, const Vec3&) { return Vec3{}; };
  return {Kind::Constant, zero, zero};
}

VectorNoise VectorNoise::ornstein_uhlenbeck(double theta, const Vec3& sigma) {
  return {Kind::OrnsteinUhlenbeck, [theta](const Vec3&, const Vec3&, const Vec3& n) { return -theta * n; },
          [sigma](const Vec3&, const Vec3&, const Vec3&) { return sigma; }};
}

VectorNoise VectorNoise::generic(Fn f, Fn sigma) { return {Kind::Generic, std::move(f), std::move(sigma)}; }

VectorNoise cross_noise(CrossKind kind, VectorNoise::Fn g, VectorNoise::Fn eta, const SuslovParams& params) {
  switch (kind) {
    case CrossKind::Chi: {
      if (params.potential.kind != Potential::Kind::Linear) {
        throw ValidationError("noise.cross", "chi cross noise needs a linear potential");
      }
      const Vec3 chi = params.potential.chi;
      return {VectorNoise::Kind::CrossChi,
              [g, chi](const Vec3& om, const Vec3& ga, const Vec3& n) { return cross(g(om, ga, n), chi); },
              [eta, chi](const Vec3& om, const Vec3& ga, const Vec3& n) { return cross(eta(om, ga, n), chi); }};
    }
    case CrossKind::Gamma:
      return {VectorNoise::Kind::CrossGamma,
              [g](const Vec3& om, const Vec3& ga, const Vec3& n) { return cross(g(om, ga, n), ga); },
              [eta](const Vec3& om, const Vec3& ga, const Vec3& n) { return cross(eta(om, ga, n), ga); }};
    case CrossKind::Momentum: {
      const InertiaTensor inertia = params.inertia;
      return {VectorNoise::Kind::CrossMomentum,
              [g, inertia](const Vec3& om, const Vec3& ga, const Vec3& n) {
                return cross(g(om, ga, n), inertia.apply(om));
              },
              [eta, inertia](const Vec3& om, const Vec3& ga, const Vec3& n) {
                return cross(eta(om, ga, n), inertia.apply(om));
              }};
    }
  }
  throw ValidationError("noise.cross", "unknown cross kind");
}

VectorNoise cross_noise(CrossKind kind, const Vec3& g, const Vec3& eta, const SuslovParams& params) {
  return cross_noise(
      kind, [g](const Vec3&, const Vec3&, const Vec3&) { return g; },
      [eta](const Vec3&, const Vec3&, const Vec3&) { return eta; }, params);
}

double lambda_det(const SuslovParams& params, const Vec3& omega, const Vec3& gamma) {
  const InertiaTensor& inertia = params.inertia;
  const Vec3 ia = inertia.solve(params.axis);
  const Vec3 du = params.potential.gradient(inertia, gamma);
  return dot(cross(omega, inertia.apply(omega)) + cross(du, gamma), ia) / dot(params.axis, ia);
}

Rates det_rhs(const SuslovParams& params, const Vec3& omega, const Vec3& gamma) {
  if (std::abs(dot(params.axis, omega)) > 1e-9) {
    throw Error(ErrorCode::ConstraintViolated, "a . Omega = " + std::to_string(dot(params.axis, omega)));
  }
  const InertiaTensor& inertia = params.inertia;
  const Vec3 du = params.potential.gradient(inertia, gamma);
  const double lambda = lambda_det(params, omega, gamma);
  const Vec3 torque = -cross(omega, inertia.apply(omega)) + cross(gamma, du) + lambda * params.axis;
  return {inertia.solve(torque), cross(gamma, omega)};
}

sde::StratonovichField det_field(const SuslovParams& params) {
  validate(params);
  const InertiaTensor inertia = params.inertia;
  const Potential pot = params.potential;
  const Vec3 ia = inertia.solve(params.axis);
  const double denom = dot(params.axis, ia);
  return {kDetDim, 1,
          [=](std::span<const double> x, std::span<double> drift, std::span<double> diffusion) {
            const Vec3 om = load3(x, 0), ga = load3(x, 3);
            const Vec3 iom = inertia.apply(om);
            const Vec3 du = pot.gradient(inertia, ga);
            const double lambda = dot(cross(om, iom) + cross(du, ga), ia) / denom;
            const Vec3 d_om = inertia.solve(-cross(om, iom) + cross(ga, du)) + lambda * ia;
            store3(d_om, drift, 0);
            store3(cross(ga, om), drift, 3);
            for (std::size_t i = 0; i < kDetDim; ++i) diffusion[i] = 0.0;
          },
          "suslov_det"};
}

sde::StratonovichField type1_field(const SuslovParams& params, ScalarNoise noise) {
  validate(params);
  const InertiaTensor inertia = params.inertia;
  const Potential pot = params.potential;
  const Vec3 ia = inertia.solve(params.axis);
  const double denom = dot(params.axis, ia);
  return {kTypeIDim, 1,
          [=, noise = std::move(noise)](std::span<const double> x, std::span<double> drift,
                                        std::span<double> diffusion) {
            const Vec3 om = load3(x, 0), ga = load3(x, 3);
            const double n = x[6];
            const Vec3 iom = inertia.apply(om);
            const Vec3 du = pot.gradient(inertia, ga);
            const double lambda = dot(cross(om, iom) + cross(du, ga), ia) / denom;
            const double f = noise.drift(om, ga, n);
            const double s = noise.diffusion(om, ga, n);
            const Vec3 d_om = inertia.solve(-cross(om, iom) + cross(ga, du)) + (lambda + f / denom) * ia;
            store3(d_om, drift, 0);
            store3(cross(ga, om), drift, 3);
            drift[6] = f;
            store3((s / denom) * ia, diffusion, 0);
            store3(Vec3{}, diffusion, 3);
            diffusion[6] = s;
          },
          "suslov_type1"};
}

sde::StratonovichField type2_field(const SuslovParams& params, VectorNoise noise, double noise_floor) {
  validate(params);
  const InertiaTensor inertia = params.inertia;
  const Potential pot = params.potential;
  return {kTypeIIDim, 1,
          [=, noise = std::move(noise)](std::span<const double> x, std::span<double> drift,
                                        std::span<double> diffusion) {
            const Vec3 om = load3(x, 0), ga = load3(x, 3), n = load3(x, 6);
            if (!(norm(n) >= noise_floor)) {
              throw Error(ErrorCode::NoiseSingular,
                          "|N| = " + std::to_string(norm(n)) + " below floor " + std::to_string(noise_floor));
            }
            const Vec3 iom = inertia.apply(om);
            const Vec3 du = pot.gradient(inertia, ga);
            const Vec3 in = inertia.solve(n);
            const double denom = dot(n, in);
            const double c = dot(cross(om, iom) + cross(du, ga), in);
            const Vec3 f = noise.drift(om, ga, n);
            const Vec3 s = noise.diffusion(om, ga, n);
            const Vec3 d_om = inertia.solve(-cross(om, iom) + cross(ga, du)) + ((c - dot(om, f)) / denom) * in;
            store3(d_om, drift, 0);
            store3(cross(ga, om), drift, 3);
            store3(f, drift, 6);
            store3((-dot(om, s) / denom) * in, diffusion, 0);
            store3(Vec3{}, diffusion, 3);
            store3(s, diffusion, 6);
          },
          "suslov_type2"};
}

Mat3 clebsch_tisserand_matrix(const SuslovParams& params) {
  return (params.potential.epsilon * params.inertia.det()) * params.inertia.inverse();
}

InvariantsReport invariants_report(const SuslovParams& params, std::span<const double> state, ConstraintType type) {
  const InertiaTensor& inertia = params.inertia;
  const Vec3 om = load3(state, 0), ga = load3(state, 3);
  const Vec3 iom = inertia.apply(om);
  InvariantsReport r;
  r.energy = 0.5 * dot(iom, om) + params.potential.value(inertia, ga);
  r.gamma_norm = dot(ga, ga);
  r.lagrange = dot(iom, ga);
  switch (type) {
    case ConstraintType::Deterministic: r.constraint = dot(params.axis, om); break;
    case ConstraintType::I: r.constraint = dot(params.axis, om) - state[6]; break;
    case ConstraintType::II: r.constraint = dot(load3(state, 6), om); break;
  }
  switch (params.potential.kind) {
    case Potential::Kind::Zero: r.momentum_square = 0.5 * dot(iom, iom); break;
    case Potential::Kind::Linear: r.kharlamova = dot(iom, params.potential.chi); break;
    case Potential::Kind::QuadraticCT:
      r.clebsch_tisserand = 0.5 * dot(iom, iom) - 0.5 * dot(clebsch_tisserand_matrix(params) * ga, ga);
      break;
  }
  return r;
}

std::optional<double> invariant_by_name(const InvariantsReport& report, std::string_view name) {
  if (name == "energy") return report.energy;
  if (name == "gamma_norm") return report.gamma_norm;
  if (name == "constraint") return report.constraint;
  if (name == "lagrange") return report.lagrange;
  if (name == "momentum_square") return report.momentum_square;
  if (name == "kharlamova") return report.kharlamova;
  if (name == "clebsch_tisserand") return report.clebsch_tisserand;
  return std::nullopt;
}

std::vector<Vec3> analytic_isotropic(const Vec3& omega0, const Vec3& axis, std::span<const double> n_path) {
  std::vector<Vec3> out;
  out.reserve(n_path.size());
  if (n_path.empty()) return out;
  const Vec3 dir = axis / dot(axis, axis);
  const double n0 = n_path.front();
  for (double n : n_path) out.push_back(omega0 + (n - n0) * dir);
  return out;
}

std::pair<double, double> energy_drift_coefficients(const SuslovParams& params, std::span<const double> state_i) {
  const InertiaTensor& inertia = params.inertia;
  const Vec3 om = load3(state_i, 0), ga = load3(state_i, 3);
  const double n = state_i[6];
  const Vec3 ia = inertia.solve(params.axis);
  const double denom = dot(params.axis, ia);
  const Vec3 du = params.potential.gradient(inertia, ga);
  const double c = dot(cross(om, inertia.apply(om)) + cross(du, ga), ia);
  return {n * c / denom, n / denom};
}

double kharlamova_rate(const InertiaTensor& inertia, const Vec3& chi, const Vec3& omega, double n) {
  const double i1 = inertia.moment(0), i2 = inertia.moment(1), i3 = inertia.moment(2);
  return chi.x * (i2 - i3) * omega.y * n + chi.y * (i3 - i1) * omega.x * n;
}

}  // namespace nonholo::suslov
