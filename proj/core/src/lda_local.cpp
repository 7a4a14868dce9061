#include "nonholo/lda_local.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <sstream>
#include <string>

#include "nonholo/errors.hpp"

namespace nonholo::lda {

namespace {

using Vec = std::vector<double>;

double fd_step(const ChartSystem& sys, double x) { return sys.fd_step * (1.0 + std::abs(x)); }

std::span<const double> coefficient_noise(ConstraintKind kind, std::span<const double> noise) {
  return kind == ConstraintKind::Ideal ? noise : std::span<const double>{};
}

Vec coefficients(const ChartSystem& sys, std::span<const double> q, std::span<const double> noise) {
  Vec a(sys.m * sys.free_dim());
  sys.coefficients(q, noise, a);
  return a;
}

Vec mass_matrix(const ChartSystem& sys, std::span<const double> q) {
  Vec mm(sys.n * sys.n);
  sys.mass(q, mm);
  return mm;
}

Vec velocity_from(const ChartSystem& sys, ConstraintKind kind, std::span<const double> a, std::span<const double> u,
                  std::span<const double> noise) {
  const std::size_t k = sys.free_dim();
  Vec v(sys.n);
  for (std::size_t al = 0; al < k; ++al) v[al] = u[al];
  for (std::size_t b = 0; b < sys.m; ++b) {
    double w = kind == ConstraintKind::Affine ? noise[b] : 0.0;
    for (std::size_t al = 0; al < k; ++al) w -= a[b * k + al] * u[al];
    v[k + b] = w;
  }
  return v;
}

Vec mat_vec(std::span<const double> mm, std::span<const double> v, std::size_t n) {
  Vec out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) out[i] += mm[i * n + j] * v[j];
  return out;
}

// S^T y for S = [Id_k; -A].
Vec project(const ChartSystem& sys, std::span<const double> a, std::span<const double> y) {
  const std::size_t k = sys.free_dim();
  Vec out(k);
  for (std::size_t al = 0; al < k; ++al) {
    double s = y[al];
    for (std::size_t b = 0; b < sys.m; ++b) s -= a[b * k + al] * y[k + b];
    out[al] = s;
  }
  return out;
}

// dLc/du = S^T M v at (q, u, N).
Vec lagrangian_momentum(const ChartSystem& sys, ConstraintKind kind, std::span<const double> q,
                        std::span<const double> u, std::span<const double> noise) {
  const Vec a = coefficients(sys, q, coefficient_noise(kind, noise));
  const Vec v = velocity_from(sys, kind, a, u, noise);
  const Vec p = mat_vec(mass_matrix(sys, q), v, sys.n);
  return project(sys, a, p);
}

// dA/dq_i for every configuration coordinate, each m*k values.
std::vector<Vec> coefficient_partials(const ChartSystem& sys, std::span<const double> q,
                                      std::span<const double> noise) {
  std::vector<Vec> out(sys.n);
  Vec qp(q.begin(), q.end());
  for (std::size_t i = 0; i < sys.n; ++i) {
    const double h = fd_step(sys, q[i]);
    qp[i] = q[i] + h;
    const Vec plus = coefficients(sys, qp, noise);
    qp[i] = q[i] - h;
    const Vec minus = coefficients(sys, qp, noise);
    qp[i] = q[i];
    out[i].resize(plus.size());
    for (std::size_t j = 0; j < plus.size(); ++j) out[i][j] = (plus[j] - minus[j]) / (2.0 * h);
  }
  return out;
}

std::string describe_point(std::span<const double> q, std::span<const double> u) {
  std::ostringstream os;
  os.precision(17);
  os << "q = (";
  for (std::size_t i = 0; i < q.size(); ++i) os << (i ? ", " : "") << q[i];
  os << "), u = (";
  for (std::size_t i = 0; i < u.size(); ++i) os << (i ? ", " : "") << u[i];
  os << ")";
  return os.str();
}

Vec b_from_partials(const ChartSystem& sys, std::span<const double> a, const std::vector<Vec>& da) {
  const std::size_t k = sys.free_dim();
  const std::size_t m = sys.m;
  Vec out(m * k * k, 0.0);
  for (std::size_t b = 0; b < m; ++b) {
    for (std::size_t al = 0; al < k; ++al) {
      for (std::size_t be = 0; be < k; ++be) {
        double val = da[be][b * k + al] - da[al][b * k + be];
        for (std::size_t c = 0; c < m; ++c) {
          const auto& ds = da[k + c];
          val += a[c * k + al] * ds[b * k + be] - a[c * k + be] * ds[b * k + al];
        }
        out[(b * k + al) * k + be] = val;
      }
    }
  }
  return out;
}

class ChartFieldEvaluator {
 public:
  ChartFieldEvaluator(std::shared_ptr<const ChartSystem> sys, ConstraintKind kind)
      : sys_(std::move(sys)), kind_(kind) {}

  void operator()(std::span<const double> x, std::span<double> drift, std::span<double> diffusion) const {
    const ChartSystem& sys = *sys_;
    const std::size_t n = sys.n, m = sys.m, k = sys.free_dim(), p = sys.p;
    const auto [q, u, noise] = split_state(sys, x);
    if (sys.domain && !sys.domain(q)) {
      throw Error(ErrorCode::ChartDomain, "state left the chart domain at " + describe_point(q, u));
    }
    const auto a_noise = coefficient_noise(kind_, noise);
    const Vec a = coefficients(sys, q, a_noise);
    const Vec v = velocity_from(sys, kind_, a, u, noise);
    const Vec mm = mass_matrix(sys, q);
    const Vec mom = mat_vec(mm, v, n);

    // Hessian S^T M S.
    Eigen::MatrixXd hess(k, k);
    {
      Vec col(n);
      for (std::size_t be = 0; be < k; ++be) {
        for (std::size_t i = 0; i < n; ++i) col[i] = 0.0;
        col[be] = 1.0;
        for (std::size_t b = 0; b < m; ++b) col[k + b] = -a[b * k + be];
        const Vec msc = project(sys, a, mat_vec(mm, col, n));
        for (std::size_t al = 0; al < k; ++al) hess(static_cast<Eigen::Index>(al), static_cast<Eigen::Index>(be)) = msc[al];
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(hess, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    if (!(lo > 0.0) || hi / lo > sys.max_condition) {
      throw Error(ErrorCode::HessianSingular, "velocity Hessian not invertible (eigenvalues " + std::to_string(lo) +
                                                  ", " + std::to_string(hi) + ") at " + describe_point(q, u));
    }

    // dLc/dq with u and N held fixed.
    Vec dl_dq(n);
    {
      Vec qp(q.begin(), q.end());
      for (std::size_t i = 0; i < n; ++i) {
        const double h = fd_step(sys, q[i]);
        qp[i] = q[i] + h;
        const double lp = constrained_lagrangian(sys, kind_, qp, u, noise);
        qp[i] = q[i] - h;
        const double lm = constrained_lagrangian(sys, kind_, qp, u, noise);
        qp[i] = q[i];
        dl_dq[i] = (lp - lm) / (2.0 * h);
      }
    }

    const std::vector<Vec> da = coefficient_partials(sys, q, a_noise);
    const Vec bcoef = b_from_partials(sys, a, da);

    // Right-hand side of the constrained-Lagrangian form.
    Vec rhs(k);
    for (std::size_t al = 0; al < k; ++al) {
      double r = dl_dq[al];
      for (std::size_t c = 0; c < m; ++c) r -= a[c * k + al] * dl_dq[k + c];
      for (std::size_t b = 0; b < m; ++b) {
        double curv = 0.0;
        for (std::size_t be = 0; be < k; ++be) curv += bcoef[(b * k + al) * k + be] * u[be];
        if (kind_ == ConstraintKind::Affine) {
          for (std::size_t c = 0; c < m; ++c) curv += da[k + c][b * k + al] * noise[c];
        }
        r -= mom[k + b] * curv;
      }
      rhs[al] = r;
    }

    // Chain rule for d(dLc/du): configuration part along qdot = v.
    {
      Vec qp(q.begin(), q.end());
      for (std::size_t i = 0; i < n; ++i) {
        const double h = fd_step(sys, q[i]);
        qp[i] = q[i] + h;
        const Vec gp = lagrangian_momentum(sys, kind_, qp, u, noise);
        qp[i] = q[i] - h;
        const Vec gm = lagrangian_momentum(sys, kind_, qp, u, noise);
        qp[i] = q[i];
        for (std::size_t al = 0; al < k; ++al) rhs[al] -= (gp[al] - gm[al]) / (2.0 * h) * v[i];
      }
    }

    // Coefficient of dN: d2Lc/du dN, plus dL/dw dA~/dN for ideal constraints.
    Vec coef_n(k * p, 0.0);
    {
      Vec np(noise.begin(), noise.end());
      for (std::size_t j = 0; j < p; ++j) {
        const double h = fd_step(sys, noise[j]);
        np[j] = noise[j] + h;
        const Vec gp = lagrangian_momentum(sys, kind_, q, u, np);
        const Vec ap = kind_ == ConstraintKind::Ideal ? coefficients(sys, q, np) : Vec{};
        np[j] = noise[j] - h;
        const Vec gm = lagrangian_momentum(sys, kind_, q, u, np);
        const Vec am = kind_ == ConstraintKind::Ideal ? coefficients(sys, q, np) : Vec{};
        np[j] = noise[j];
        for (std::size_t al = 0; al < k; ++al) {
          double c = (gp[al] - gm[al]) / (2.0 * h);
          if (kind_ == ConstraintKind::Ideal) {
            for (std::size_t b = 0; b < m; ++b) c += mom[k + b] * (ap[b * k + al] - am[b * k + al]) / (2.0 * h);
          }
          coef_n[al * p + j] = c;
        }
      }
    }

    Vec f(p), sigma(p);
    sys.noise_drift(q, v, noise, f);
    sys.noise_diffusion(q, v, noise, sigma);

    Eigen::VectorXd rhs_drift(k), rhs_noise(k);
    for (std::size_t al = 0; al < k; ++al) {
      double cf = 0.0, cs = 0.0;
      for (std::size_t j = 0; j < p; ++j) {
        cf += coef_n[al * p + j] * f[j];
        cs += coef_n[al * p + j] * sigma[j];
      }
      rhs_drift(static_cast<Eigen::Index>(al)) = rhs[al] - cf;
      rhs_noise(static_cast<Eigen::Index>(al)) = -cs;
    }
    const Eigen::LLT<Eigen::MatrixXd> llt(hess);
    const Eigen::VectorXd du_drift = llt.solve(rhs_drift);
    const Eigen::VectorXd du_noise = llt.solve(rhs_noise);

    const std::size_t off_u = n, off_n = n + k;
    for (std::size_t i = 0; i < n; ++i) {
      drift[i] = v[i];
      diffusion[i] = 0.0;
    }
    for (std::size_t al = 0; al < k; ++al) {
      drift[off_u + al] = du_drift(static_cast<Eigen::Index>(al));
      diffusion[off_u + al] = du_noise(static_cast<Eigen::Index>(al));
    }
    for (std::size_t j = 0; j < p; ++j) {
      drift[off_n + j] = f[j];
      diffusion[off_n + j] = sigma[j];
    }
  }

 private:
  std::shared_ptr<const ChartSystem> sys_;
  ConstraintKind kind_;
};

}  // namespace

StateView split_state(const ChartSystem& sys, std::span<const double> x) {
  const std::size_t k = sys.free_dim();
  return {x.subspan(0, sys.n), x.subspan(sys.n, k), x.subspan(sys.n + k, sys.p)};
}

std::vector<double> b_coefficients(const ChartSystem& sys, std::span<const double> q, std::span<const double> noise) {
  const Vec a = coefficients(sys, q, noise);
  return b_from_partials(sys, a, coefficient_partials(sys, q, noise));
}

std::vector<double> constrained_velocity(const ChartSystem& sys, ConstraintKind kind, std::span<const double> q,
                                         std::span<const double> u, std::span<const double> noise) {
  const Vec a = coefficients(sys, q, coefficient_noise(kind, noise));
  return velocity_from(sys, kind, a, u, noise);
}

double constrained_lagrangian(const ChartSystem& sys, ConstraintKind kind, std::span<const double> q,
                              std::span<const double> u, std::span<const double> noise) {
  const Vec v = constrained_velocity(sys, kind, q, u, noise);
  const Vec p = mat_vec(mass_matrix(sys, q), v, sys.n);
  double kinetic = 0.0;
  for (std::size_t i = 0; i < sys.n; ++i) kinetic += 0.5 * v[i] * p[i];
  return kinetic - sys.potential(q);
}

double energy(const ChartSystem& sys, std::span<const double> q, std::span<const double> v) {
  const Vec p = mat_vec(mass_matrix(sys, q), v, sys.n);
  double kinetic = 0.0;
  for (std::size_t i = 0; i < sys.n; ++i) kinetic += 0.5 * v[i] * p[i];
  return kinetic + sys.potential(q);
}

std::vector<double> constraint_residual(const ChartSystem& sys, ConstraintKind kind, std::span<const double> q,
                                        std::span<const double> v, std::span<const double> noise) {
  const std::size_t k = sys.free_dim();
  const Vec a = coefficients(sys, q, coefficient_noise(kind, noise));
  Vec out(sys.m);
  for (std::size_t b = 0; b < sys.m; ++b) {
    double r = v[k + b];
    for (std::size_t al = 0; al < k; ++al) r += a[b * k + al] * v[al];
    if (kind == ConstraintKind::Affine) r -= noise[b];
    out[b] = r;
  }
  return out;
}

void validate(const ChartSystem& sys, ConstraintKind kind) {
  if (sys.n == 0 || sys.m == 0 || sys.m >= sys.n) {
    throw Error(ErrorCode::DimensionMismatch, "need 0 < m < n for a chart system");
  }
  if (kind == ConstraintKind::Affine && sys.p != sys.m) {
    throw Error(ErrorCode::DimensionMismatch, "affine constraints need one noise component per constraint");
  }
  if (kind == ConstraintKind::Ideal && sys.p == 0) {
    throw Error(ErrorCode::DimensionMismatch, "ideal constraints need a noise parameter");
  }
  if (!sys.mass || !sys.potential || !sys.coefficients || !sys.noise_drift || !sys.noise_diffusion) {
    throw Error(ErrorCode::DimensionMismatch, "chart system is missing a closure");
  }
}

sde::StratonovichField type1_field(std::shared_ptr<const ChartSystem> sys) {
  validate(*sys, ConstraintKind::Affine);
  const std::size_t dim = sys->state_dim();
  return {dim, 1, ChartFieldEvaluator(std::move(sys), ConstraintKind::Affine), "chart_type1"};
}

sde::StratonovichField type2_field(std::shared_ptr<const ChartSystem> sys) {
  validate(*sys, ConstraintKind::Ideal);
  const std::size_t dim = sys->state_dim();
  return {dim, 1, ChartFieldEvaluator(std::move(sys), ConstraintKind::Ideal), "chart_type2"};
}

ChartSystem nonholonomic_particle(ConstraintKind kind, double theta, double sigma) {
  ChartSystem sys;
  sys.n = 3;
  sys.m = 1;
  sys.p = 1;
  sys.mass = [](std::span<const double>, std::span<double> mm) {
    for (std::size_t i = 0; i < 9; ++i) mm[i] = (i % 4 == 0) ? 1.0 : 0.0;
  };
  sys.potential = [](std::span<const double>) { return 0.0; };
  if (kind == ConstraintKind::Affine) {
    sys.coefficients = [](std::span<const double> q, std::span<const double>, std::span<double> out) {
      out[0] = -q[1];
      out[1] = 0.0;
    };
  } else {
    sys.coefficients = [](std::span<const double> q, std::span<const double> noise, std::span<double> out) {
      out[0] = -q[1] - noise[0];
      out[1] = 0.0;
    };
  }
  sys.noise_drift = [theta](std::span<const double>, std::span<const double>, std::span<const double> noise,
                            std::span<double> out) { out[0] = -theta * noise[0]; };
  sys.noise_diffusion = [sigma](std::span<const double>, std::span<const double>, std::span<const double>,
                                std::span<double> out) { out[0] = sigma; };
  return sys;
}

}  // namespace nonholo::lda
