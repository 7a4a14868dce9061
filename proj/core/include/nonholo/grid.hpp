#pragma once

// Uniform three-dimensional cell grids carrying a probability density.
// Cell (i, j, k) has flat index (i * cells[1] + j) * cells[2] + k.

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace nonholo {

struct Axis {
  double lo = -1.0;
  double hi = 1.0;
  std::size_t cells = 1;

  double width() const { return (hi - lo) / static_cast<double>(cells); }
  double center(std::size_t i) const { return lo + (static_cast<double>(i) + 0.5) * width(); }
  double face(std::size_t i) const { return lo + static_cast<double>(i) * width(); }
  /// Cell containing x; the upper edge belongs to the last cell.
  std::optional<std::size_t> locate(double x) const;

  friend bool operator==(const Axis&, const Axis&) = default;
};

class Grid3 {
 public:
  /// Throws ValidationError unless hi > lo and cells >= 1 on every axis.
  explicit Grid3(std::array<Axis, 3> axes);

  const std::array<Axis, 3>& axes() const { return axes_; }
  const Axis& axis(std::size_t d) const { return axes_[d]; }
  std::size_t size() const { return density_.size(); }
  double cell_volume() const { return volume_; }

  std::size_t index(std::size_t i, std::size_t j, std::size_t k) const {
    return (i * axes_[1].cells + j) * axes_[2].cells + k;
  }
  std::array<std::size_t, 3> multi_index(std::size_t flat) const;
  std::array<double, 3> center(std::size_t flat) const;
  std::optional<std::size_t> locate(const std::array<double, 3>& point) const;

  std::vector<double>& density() { return density_; }
  const std::vector<double>& density() const { return density_; }

  /// sum p * vol.
  double mass() const;
  /// Scales the density to unit mass; returns the mass before scaling.
  double normalize();

  bool same_layout(const Grid3& other) const { return axes_ == other.axes_; }

 private:
  std::array<Axis, 3> axes_;
  double volume_;
  std::vector<double> density_;
};

/// Unit mass concentrated in the cell containing `point`.
/// Throws CoverageLow when the point lies outside the grid.
Grid3 point_mass(const std::array<Axis, 3>& axes, const std::array<double, 3>& point);

/// Normalized histogram of sample points (density per unit volume, total
/// mass over the in-grid fraction). Throws EmptyEnsemble for no samples and
/// CoverageLow when more than max_outside of them fall outside the grid.
Grid3 histogram(std::span<const std::array<double, 3>> points, const std::array<Axis, 3>& axes,
                double max_outside = 0.01);

/// sum |p_a - p_b| * vol; throws DimensionMismatch for different layouts.
double l1_distance(const Grid3& a, const Grid3& b);

}  // namespace nonholo
