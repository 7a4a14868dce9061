#pragma once

// Explicit finite-volume solver for the Fokker-Planck equation of a
// Stratonovich SDE restricted to three of its coordinates:
//   dp/dt = -sum_d d/dx_d (mu_d p) + sum_d d2/dx_d2 (D_d p)
// with mu = a + 1/2 b . grad b (Stratonovich correction) and D = 1/2 b b^T.
// Advective fluxes are first-order upwind with mu taken at face centres,
// diffusive fluxes are central differences of D p, boundaries are
// zero-flux and the density is renormalized after every step.

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "nonholo/grid.hpp"
#include "nonholo/sde.hpp"
#include "nonholo/suslov.hpp"

namespace nonholo::fp {

/// How three grid coordinates embed into the full SDE state.
struct Reduction {
  /// State indices of the grid coordinates (their drift/diffusion are used).
  std::array<std::size_t, 3> coords{};
  /// Fills a full state from a grid point.
  std::function<void(const std::array<double, 3>& g, std::span<double> x)> lift;
  /// State indices the reduced dynamics must not depend on. They are
  /// perturbed by `probe_shift` at sample points during assembly.
  std::vector<std::size_t> probe_coords;
  double probe_shift = 0.3;
};

struct Generator {
  std::array<Axis, 3> axes;
  /// face_drift[d] has (cells_d + 1) * (product of the other cells) entries,
  /// indexed like the grid with the d-th index running over faces.
  std::array<std::vector<double>, 3> face_drift;
  /// D_d at cell centres.
  std::array<std::vector<double>, 3> diffusion;
};

/// Throws UnsupportedDependence if the reduced drift or diffusion changes
/// under the probe perturbation, or if b b^T has off-diagonal entries
/// between grid coordinates.
Generator assemble_generator(const sde::StratonovichField& field, const Reduction& reduction,
                             const std::array<Axis, 3>& axes);

/// Largest stable step: 0.9 / max over cells of the total outflow rate
/// sum_d (mu+_right + mu-_left) / dx_d + 2 D_d / dx_d^2.
double max_stable_dt(const Generator& gen);

struct SolveStats {
  std::size_t steps = 0;
  double dt = 0.0;
  /// Largest |mass change| in a single step before renormalization.
  double max_mass_defect = 0.0;
  /// Smallest density value seen at any step.
  double min_density = 0.0;
};

/// Explicit Euler steps of size t_final / ceil(t_final / dt_fp). Throws
/// CflViolation naming the limiting cell when dt_fp exceeds max_stable_dt.
SolveStats fp_solve(Grid3& grid, const Generator& gen, double t_final, double dt_fp);

/// L1 distance between the density and a histogram of sample points.
/// Throws CoverageLow when more than 1% of the samples are off-grid.
double mc_histogram_distance(const Grid3& density, std::span<const std::array<double, 3>> samples);

/// Reduced Suslov coordinates (Omega1, Omega2, N) for the type I field with
/// a = e3: Omega = (g0, g1, g2), Gamma = e3, N = g2; Gamma is probed.
/// Throws ValidationError unless a = e3.
Reduction suslov_type1_reduction(const suslov::SuslovParams& params);

}  // namespace nonholo::fp
