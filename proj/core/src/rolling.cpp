#include "nonholo/rolling.hpp"

#include <cmath>
#include <string>

#include "nonholo/errors.hpp"

namespace nonholo::rolling {

AlphaFn constant_alpha(double r) {
  return [r](const Vec3&) { return r * Mat3::identity(); };
}

AlphaFn skew_alpha(double r) {
  return [r](const Vec3& gamma) { return r * hat(gamma); };
}

AlphaTildeFn shifted_alpha(double r) {
  return [r](const Vec3&, std::span<const double> nt) { return (r + nt[0]) * Mat3::identity(); };
}

void validate(const RollingParams& params, bool type2) {
  if (!(params.mass > 0.0) || !std::isfinite(params.mass)) {
    throw ValidationError("mass", "mass must be positive and finite");
  }
  if (type2) {
    if (!params.alpha_tilde) throw ValidationError("alpha", "type II needs an alpha~ closure");
    if (params.noise_dim == 0) throw ValidationError("noise_dim", "noise dimension must be at least 1");
  } else if (!params.alpha) {
    throw ValidationError("alpha", "alpha closure missing");
  }
  if (!(params.fd_step > 0.0)) throw ValidationError("fd_step", "must be positive");
}

Mat3 effective_mass(const RollingParams& params, const Mat3& alpha) {
  const Mat3 k = params.inertia.matrix() + params.mass * (transpose(alpha) * alpha);
  const double scale = frobenius_norm(k);
  const double m1 = k(0, 0);
  const double m2 = k(0, 0) * k(1, 1) - k(0, 1) * k(1, 0);
  const double m3 = determinant(k);
  const double eps = 1e-14;
  if (!(m1 > eps * scale && m2 > eps * scale * scale && m3 > eps * scale * scale * scale)) {
    throw Error(ErrorCode::EffectiveMassSingular,
                "effective mass I + m alpha^T alpha is not positive definite (det " + std::to_string(m3) + ")");
  }
  return k;
}

namespace {

Vec3 solve_spd(const Mat3& k, const Vec3& b) { return (adjugate(k) * b) / determinant(k); }

}  // namespace

Mat3 alpha_derivative(const RollingParams& params, const Vec3& gamma, const Vec3& v) {
  const double h = params.fd_step;
  return (params.alpha(gamma + h * v) - params.alpha(gamma - h * v)) * (0.5 / h);
}

Rates det_rhs(const RollingParams& params, const Vec3& omega, const Vec3& gamma) {
  const InertiaTensor& inertia = params.inertia;
  const Mat3 a = params.alpha(gamma);
  const Mat3 k = effective_mass(params, a);
  const Vec3 y = a * omega;
  const Vec3 gdot = cross(gamma, omega);
  const Vec3 du = params.potential.gradient(inertia, gamma);
  const Vec3 rhs = -cross(omega, inertia.apply(omega)) + cross(gamma, du) -
                   params.mass * (transpose(a) * (alpha_derivative(params, gamma, gdot) * omega + cross(omega, y)));
  return {solve_spd(k, rhs), gdot};
}

sde::StratonovichField det_field(const RollingParams& params) {
  validate(params);
  return {6, 1,
          [params](std::span<const double> x, std::span<double> drift, std::span<double> diffusion) {
            const Rates r = det_rhs(params, load3(x, 0), load3(x, 3));
            store3(r.omega, drift, 0);
            store3(r.gamma, drift, 3);
            for (std::size_t i = 0; i < 6; ++i) diffusion[i] = 0.0;
          },
          "rolling_det"};
}

NoiseModel NoiseModel::additive(std::vector<double> sigma) {
  return {[](const Vec3&, const Vec3&, const Vec3&, std::span<const double>, std::span<double> out) {
            for (double& v : out) v = 0.0;
          },
          [sigma](const Vec3&, const Vec3&, const Vec3&, std::span<const double>, std::span<double> out) {
            for (std::size_t i = 0; i < out.size(); ++i) out[i] = sigma.at(i);
          }};
}

NoiseModel NoiseModel::ornstein_uhlenbeck(double theta, std::vector<double> sigma) {
  return {[theta](const Vec3&, const Vec3&, const Vec3&, std::span<const double> n, std::span<double> out) {
            for (std::size_t i = 0; i < out.size(); ++i) out[i] = -theta * n[i];
          },
          [sigma](const Vec3&, const Vec3&, const Vec3&, std::span<const double>, std::span<double> out) {
            for (std::size_t i = 0; i < out.size(); ++i) out[i] = sigma.at(i);
          }};
}

sde::StratonovichField type1_field(const RollingParams& params, NoiseModel noise) {
  validate(params);
  return {9, 1,
          [params, noise = std::move(noise)](std::span<const double> x, std::span<double> drift,
                                             std::span<double> diffusion) {
            const InertiaTensor& inertia = params.inertia;
            const double m = params.mass;
            const Vec3 om = load3(x, 0), ga = load3(x, 3), n = load3(x, 6);
            const Mat3 a = params.alpha(ga);
            const Mat3 at = transpose(a);
            const Mat3 k = effective_mass(params, a);
            const Vec3 y = a * om + n;
            double fbuf[3], sbuf[3];
            noise.drift(om, y, ga, x.subspan(6, 3), fbuf);
            noise.diffusion(om, y, ga, x.subspan(6, 3), sbuf);
            const Vec3 f{fbuf[0], fbuf[1], fbuf[2]}, s{sbuf[0], sbuf[1], sbuf[2]};
            const Vec3 gdot = cross(ga, om);
            const Vec3 du = params.potential.gradient(inertia, ga);
            const Vec3 rhs = -cross(om, inertia.apply(om)) + cross(ga, du) -
                             m * (at * (alpha_derivative(params, ga, gdot) * om + cross(om, y) + f));
            store3(solve_spd(k, rhs), drift, 0);
            store3(gdot, drift, 3);
            store3(f, drift, 6);
            store3(solve_spd(k, -m * (at * s)), diffusion, 0);
            store3(Vec3{}, diffusion, 3);
            store3(s, diffusion, 6);
          },
          "rolling_type1"};
}

sde::StratonovichField type2_field(const RollingParams& params, NoiseModel noise) {
  validate(params, true);
  const std::size_t p = params.noise_dim;
  return {6 + p, 1,
          [params, p, noise = std::move(noise)](std::span<const double> x, std::span<double> drift,
                                                std::span<double> diffusion) {
            const InertiaTensor& inertia = params.inertia;
            const double m = params.mass;
            const double h = params.fd_step;
            const Vec3 om = load3(x, 0), ga = load3(x, 3);
            const std::span<const double> nt = x.subspan(6, p);
            const Mat3 a = params.alpha_tilde(ga, nt);
            const Mat3 at = transpose(a);
            const Mat3 k = effective_mass(params, a);
            const Vec3 y = a * om;
            std::vector<double> f(p), s(p), shifted(nt.begin(), nt.end());
            noise.drift(om, y, ga, nt, f);
            noise.diffusion(om, y, ga, nt, s);
            const Vec3 gdot = cross(ga, om);
            const Mat3 da_gamma =
                (params.alpha_tilde(ga + h * gdot, nt) - params.alpha_tilde(ga - h * gdot, nt)) * (0.5 / h);
            // sum_j d alpha~/dNt_j Omega weighted by f_j and sigma_j.
            Vec3 df{}, ds{};
            for (std::size_t j = 0; j < p; ++j) {
              const double hj = h * (1.0 + std::abs(nt[j]));
              shifted[j] = nt[j] + hj;
              const Mat3 up = params.alpha_tilde(ga, shifted);
              shifted[j] = nt[j] - hj;
              const Mat3 down = params.alpha_tilde(ga, shifted);
              shifted[j] = nt[j];
              const Vec3 col = ((up - down) * (0.5 / hj)) * om;
              df += f[j] * col;
              ds += s[j] * col;
            }
            const Vec3 du = params.potential.gradient(inertia, ga);
            const Vec3 rhs = -cross(om, inertia.apply(om)) + cross(ga, du) -
                             m * (at * (da_gamma * om + cross(om, y) + df));
            store3(solve_spd(k, rhs), drift, 0);
            store3(gdot, drift, 3);
            store3(solve_spd(k, -m * (at * ds)), diffusion, 0);
            store3(Vec3{}, diffusion, 3);
            for (std::size_t j = 0; j < p; ++j) {
              drift[6 + j] = f[j];
              diffusion[6 + j] = s[j];
            }
          },
          "rolling_type2"};
}

Vec3 reconstruct_y_type1(const RollingParams& params, std::span<const double> state) {
  return params.alpha(load3(state, 3)) * load3(state, 0) + load3(state, 6);
}

Vec3 reconstruct_y_type2(const RollingParams& params, std::span<const double> state) {
  return params.alpha_tilde(load3(state, 3), state.subspan(6, params.noise_dim)) * load3(state, 0);
}

double energy(const RollingParams& params, const Vec3& omega, const Vec3& y, const Vec3& gamma) {
  return 0.5 * dot(omega, params.inertia.apply(omega)) + 0.5 * params.mass * dot(y, y) +
         params.potential.value(params.inertia, gamma);
}

double energy_drift_rhs(const RollingParams& params, const Vec3& omega, const Vec3& y, const Vec3& n,
                        const Vec3& dy, double dt) {
  return dot(params.mass * dy + dt * cross(omega, params.mass * y), n);
}

}  // namespace nonholo::rolling
