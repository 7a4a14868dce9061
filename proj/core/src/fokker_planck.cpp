#include "nonholo/fokker_planck.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <fmt/format.h>

#include "nonholo/errors.hpp"

namespace nonholo::fp {

namespace {

std::array<std::size_t, 3> face_dims(const std::array<Axis, 3>& axes, std::size_t d) {
  std::array<std::size_t, 3> dims{axes[0].cells, axes[1].cells, axes[2].cells};
  ++dims[d];
  return dims;
}

std::size_t flat(const std::array<std::size_t, 3>& dims, std::size_t i, std::size_t j, std::size_t k) {
  return (i * dims[1] + j) * dims[2] + k;
}

// Drift and diffusion of the grid coordinates at one grid point.
class ReducedEvaluator {
 public:
  ReducedEvaluator(const sde::StratonovichField& field, const Reduction& red)
      : field_(field),
        red_(red),
        x_(field.dim()),
        drift_(field.dim()),
        diff_(field.dim() * field.channels()) {}

  // a[d] and b[d * m + c] for the three grid coordinates.
  void eval(const std::array<double, 3>& g, std::array<double, 3>& a, std::vector<double>& b, double shift = 0.0) {
    red_.lift(g, x_);
    for (std::size_t idx : red_.probe_coords) x_[idx] += shift;
    field_.evaluate(x_, drift_, diff_);
    const std::size_t m = field_.channels();
    b.resize(3 * m);
    for (std::size_t d = 0; d < 3; ++d) {
      a[d] = drift_[red_.coords[d]];
      for (std::size_t c = 0; c < m; ++c) b[d * m + c] = diff_[red_.coords[d] * m + c];
    }
  }

  // Ito drift mu = a + 1/2 sum_c sum_e b_ec d_e b_dc.
  std::array<double, 3> ito_drift(const std::array<double, 3>& g) {
    std::array<double, 3> a{};
    eval(g, a, b0_);
    const std::size_t m = field_.channels();
    bool any = false;
    for (double v : b0_) any = any || v != 0.0;
    if (!any) return a;
    std::array<double, 3> dummy{};
    for (std::size_t e = 0; e < 3; ++e) {
      const double h = 1e-6 * (1.0 + std::abs(g[e]));
      std::array<double, 3> gp = g, gm = g;
      gp[e] += h;
      gm[e] -= h;
      eval(gp, dummy, bp_);
      eval(gm, dummy, bm_);
      for (std::size_t d = 0; d < 3; ++d) {
        for (std::size_t c = 0; c < m; ++c) {
          a[d] += 0.5 * b0_[e * m + c] * (bp_[d * m + c] - bm_[d * m + c]) / (2.0 * h);
        }
      }
    }
    return a;
  }

  std::size_t channels() const { return field_.channels(); }

 private:
  const sde::StratonovichField& field_;
  const Reduction& red_;
  std::vector<double> x_, drift_, diff_, b0_, bp_, bm_;
};

void check_dependence(ReducedEvaluator& ev, const Reduction& red, const std::array<Axis, 3>& axes) {
  if (red.probe_coords.empty()) return;
  std::array<double, 3> a0{}, a1{};
  std::vector<double> b0, b1;
  for (int s = 0; s < 27; ++s) {
    std::array<double, 3> g{};
    int r = s;
    for (std::size_t d = 0; d < 3; ++d) {
      const double frac = 0.2 + 0.3 * (r % 3);
      r /= 3;
      g[d] = axes[d].lo + frac * (axes[d].hi - axes[d].lo);
    }
    ev.eval(g, a0, b0);
    ev.eval(g, a1, b1, red.probe_shift);
    auto differs = [](double u, double v) { return std::abs(u - v) > 1e-9 * (1.0 + std::abs(u)); };
    for (std::size_t d = 0; d < 3; ++d) {
      bool bad = differs(a0[d], a1[d]);
      for (std::size_t c = 0; c < ev.channels(); ++c) {
        bad = bad || differs(b0[d * ev.channels() + c], b1[d * ev.channels() + c]);
      }
      if (bad) {
        throw Error(ErrorCode::UnsupportedDependence,
                    fmt::format("reduced coefficients of grid coordinate {} depend on the excluded coordinates "
                                "(checked at ({:.6g}, {:.6g}, {:.6g}))",
                                d, g[0], g[1], g[2]));
      }
    }
  }
}

}  // namespace

Generator assemble_generator(const sde::StratonovichField& field, const Reduction& reduction,
                             const std::array<Axis, 3>& axes) {
  for (std::size_t d = 0; d < 3; ++d) {
    if (reduction.coords[d] >= field.dim()) {
      throw Error(ErrorCode::DimensionMismatch, "reduction coordinate outside the field dimension");
    }
  }
  if (!reduction.lift) throw ValidationError("lift", "reduction needs a lift");
  const Grid3 grid(axes);  // validates the axes
  ReducedEvaluator ev(field, reduction);
  check_dependence(ev, reduction, axes);

  Generator gen;
  gen.axes = axes;
  const std::size_t m = field.channels();
  std::array<double, 3> a{};
  std::vector<double> b;
  for (std::size_t d = 0; d < 3; ++d) gen.diffusion[d].assign(grid.size(), 0.0);
  for (std::size_t cell = 0; cell < grid.size(); ++cell) {
    const auto g = grid.center(cell);
    ev.eval(g, a, b);
    for (std::size_t d = 0; d < 3; ++d) {
      double dd = 0.0;
      for (std::size_t c = 0; c < m; ++c) dd += b[d * m + c] * b[d * m + c];
      gen.diffusion[d][cell] = 0.5 * dd;
      for (std::size_t e = d + 1; e < 3; ++e) {
        double de = 0.0, ee = 0.0;
        for (std::size_t c = 0; c < m; ++c) {
          de += b[d * m + c] * b[e * m + c];
          ee += b[e * m + c] * b[e * m + c];
        }
        if (std::abs(de) > 1e-12 * (1.0 + dd + ee)) {
          throw Error(ErrorCode::UnsupportedDependence,
                      fmt::format("diffusion couples grid coordinates {} and {}", d, e));
        }
      }
    }
  }
  for (std::size_t d = 0; d < 3; ++d) {
    const auto dims = face_dims(axes, d);
    gen.face_drift[d].assign(dims[0] * dims[1] * dims[2], 0.0);
    for (std::size_t i = 0; i < dims[0]; ++i) {
      for (std::size_t j = 0; j < dims[1]; ++j) {
        for (std::size_t k = 0; k < dims[2]; ++k) {
          const std::array<std::size_t, 3> idx{i, j, k};
          std::array<double, 3> g{};
          for (std::size_t e = 0; e < 3; ++e) g[e] = e == d ? axes[e].face(idx[e]) : axes[e].center(idx[e]);
          gen.face_drift[d][flat(dims, i, j, k)] = ev.ito_drift(g)[d];
        }
      }
    }
  }
  return gen;
}

namespace {

struct RateScan {
  double max_rate = 0.0;
  std::size_t cell = 0;
};

RateScan scan_rates(const Generator& gen) {
  const Grid3 grid(gen.axes);
  RateScan scan;
  for (std::size_t cell = 0; cell < grid.size(); ++cell) {
    const auto idx = grid.multi_index(cell);
    double rate = 0.0;
    for (std::size_t d = 0; d < 3; ++d) {
      const auto dims = face_dims(gen.axes, d);
      const double dx = gen.axes[d].width();
      std::array<std::size_t, 3> lo = idx, hi = idx;
      ++hi[d];
      const std::size_t n = gen.axes[d].cells;
      double faces = 0.0;
      if (idx[d] + 1 < n) {
        rate += std::max(gen.face_drift[d][flat(dims, hi[0], hi[1], hi[2])], 0.0) / dx;
        faces += 1.0;
      }
      if (idx[d] > 0) {
        rate += std::max(-gen.face_drift[d][flat(dims, lo[0], lo[1], lo[2])], 0.0) / dx;
        faces += 1.0;
      }
      rate += faces * gen.diffusion[d][cell] / (dx * dx);
    }
    if (rate > scan.max_rate) {
      scan.max_rate = rate;
      scan.cell = cell;
    }
  }
  return scan;
}

}  // namespace

double max_stable_dt(const Generator& gen) {
  const RateScan scan = scan_rates(gen);
  return scan.max_rate > 0.0 ? 0.9 / scan.max_rate : std::numeric_limits<double>::infinity();
}

SolveStats fp_solve(Grid3& grid, const Generator& gen, double t_final, double dt_fp) {
  if (!grid.same_layout(Grid3(gen.axes))) {
    throw Error(ErrorCode::DimensionMismatch, "generator and density grids differ");
  }
  if (!(dt_fp > 0.0) || !(t_final >= 0.0)) throw Error(ErrorCode::InvalidStep, "dt_fp must be positive");
  const RateScan scan = scan_rates(gen);
  if (dt_fp * scan.max_rate > 0.9 * (1.0 + 1e-12)) {
    const auto idx = grid.multi_index(scan.cell);
    const auto c = grid.center(scan.cell);
    throw Error(ErrorCode::CflViolation,
                fmt::format("dt_fp = {:.6g} exceeds the stable limit {:.6g} set by cell ({}, {}, {}) at "
                            "({:.6g}, {:.6g}, {:.6g})",
                            dt_fp, 0.9 / scan.max_rate, idx[0], idx[1], idx[2], c[0], c[1], c[2]));
  }

  SolveStats stats;
  stats.steps = t_final > 0.0 ? static_cast<std::size_t>(std::ceil(t_final / dt_fp - 1e-12)) : 0;
  stats.dt = stats.steps > 0 ? t_final / static_cast<double>(stats.steps) : 0.0;
  std::vector<double>& p = grid.density();
  stats.min_density = *std::min_element(p.begin(), p.end());
  std::vector<double> next(p.size());
  const std::array<std::size_t, 3> cells{gen.axes[0].cells, gen.axes[1].cells, gen.axes[2].cells};

  for (std::size_t step = 0; step < stats.steps; ++step) {
    const double before = grid.mass();
    next = p;
    for (std::size_t d = 0; d < 3; ++d) {
      const auto dims = face_dims(gen.axes, d);
      const double dx = gen.axes[d].width();
      const double lam = stats.dt / dx;
      const std::size_t stride = d == 0 ? cells[1] * cells[2] : (d == 1 ? cells[2] : 1);
      for (std::size_t i = 0; i < cells[0]; ++i) {
        for (std::size_t j = 0; j < cells[1]; ++j) {
          for (std::size_t k = 0; k < cells[2]; ++k) {
            const std::array<std::size_t, 3> idx{i, j, k};
            if (idx[d] + 1 >= cells[d]) continue;
            const std::size_t left = grid.index(i, j, k);
            const std::size_t right = left + stride;
            std::array<std::size_t, 3> f = idx;
            ++f[d];
            const double mu = gen.face_drift[d][flat(dims, f[0], f[1], f[2])];
            const double flux = std::max(mu, 0.0) * p[left] + std::min(mu, 0.0) * p[right] -
                                (gen.diffusion[d][right] * p[right] - gen.diffusion[d][left] * p[left]) / dx;
            next[left] -= lam * flux;
            next[right] += lam * flux;
          }
        }
      }
    }
    p.swap(next);
    stats.min_density = std::min(stats.min_density, *std::min_element(p.begin(), p.end()));
    stats.max_mass_defect = std::max(stats.max_mass_defect, std::abs(grid.mass() - before));
    grid.normalize();
  }
  return stats;
}

double mc_histogram_distance(const Grid3& density, std::span<const std::array<double, 3>> samples) {
  return l1_distance(density, histogram(samples, density.axes()));
}

Reduction suslov_type1_reduction(const suslov::SuslovParams& params) {
  if (params.axis != Vec3{0.0, 0.0, 1.0}) {
    throw ValidationError("axis", "the reduced Fokker-Planck coordinates assume a = e3");
  }
  Reduction red;
  red.coords = {0, 1, 6};
  red.lift = [](const std::array<double, 3>& g, std::span<double> x) {
    x[0] = g[0];
    x[1] = g[1];
    x[2] = g[2];
    x[3] = 0.0;
    x[4] = 0.0;
    x[5] = 1.0;
    x[6] = g[2];
  };
  red.probe_coords = {3, 4, 5};
  return red;
}

}  // namespace nonholo::fp
