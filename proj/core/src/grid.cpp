#include "nonholo/grid.hpp"

#include <cmath>
#include <string>

#include "nonholo/errors.hpp"

namespace nonholo {

std::optional<std::size_t> Axis::locate(double x) const {
  if (!(x >= lo && x <= hi)) return std::nullopt;
  const auto i = static_cast<std::size_t>((x - lo) / width());
  return i < cells ? i : cells - 1;
}

Grid3::Grid3(std::array<Axis, 3> axes) : axes_(axes), volume_(1.0) {
  std::size_t total = 1;
  for (std::size_t d = 0; d < 3; ++d) {
    const Axis& a = axes_[d];
    const std::string key = "axis" + std::to_string(d);
    if (a.cells == 0) throw ValidationError(key, "needs at least one cell");
    if (!(a.hi > a.lo) || !std::isfinite(a.lo) || !std::isfinite(a.hi)) {
      throw ValidationError(key, "bounds must be finite with hi > lo");
    }
    volume_ *= a.width();
    total *= a.cells;
  }
  density_.assign(total, 0.0);
}

std::array<std::size_t, 3> Grid3::multi_index(std::size_t flat) const {
  const std::size_t k = flat % axes_[2].cells;
  flat /= axes_[2].cells;
  return {flat / axes_[1].cells, flat % axes_[1].cells, k};
}

std::array<double, 3> Grid3::center(std::size_t flat) const {
  const auto idx = multi_index(flat);
  return {axes_[0].center(idx[0]), axes_[1].center(idx[1]), axes_[2].center(idx[2])};
}

std::optional<std::size_t> Grid3::locate(const std::array<double, 3>& point) const {
  const auto i = axes_[0].locate(point[0]);
  const auto j = axes_[1].locate(point[1]);
  const auto k = axes_[2].locate(point[2]);
  if (!i || !j || !k) return std::nullopt;
  return index(*i, *j, *k);
}

double Grid3::mass() const {
  double s = 0.0;
  for (double p : density_) s += p;
  return s * volume_;
}

double Grid3::normalize() {
  const double m = mass();
  if (m > 0.0) {
    for (double& p : density_) p /= m;
  }
  return m;
}

Grid3 point_mass(const std::array<Axis, 3>& axes, const std::array<double, 3>& point) {
  Grid3 g(axes);
  const auto cell = g.locate(point);
  if (!cell) throw Error(ErrorCode::CoverageLow, "initial point lies outside the grid");
  g.density()[*cell] = 1.0 / g.cell_volume();
  return g;
}

Grid3 histogram(std::span<const std::array<double, 3>> points, const std::array<Axis, 3>& axes,
                double max_outside) {
  if (points.empty()) throw Error(ErrorCode::EmptyEnsemble, "histogram of an empty sample set");
  Grid3 g(axes);
  std::size_t outside = 0;
  for (const auto& p : points) {
    if (const auto cell = g.locate(p)) {
      g.density()[*cell] += 1.0;
    } else {
      ++outside;
    }
  }
  const double n = static_cast<double>(points.size());
  if (static_cast<double>(outside) > max_outside * n) {
    throw Error(ErrorCode::CoverageLow, std::to_string(outside) + " of " + std::to_string(points.size()) +
                                            " samples fall outside the grid");
  }
  const double scale = 1.0 / (n * g.cell_volume());
  for (double& p : g.density()) p *= scale;
  return g;
}

double l1_distance(const Grid3& a, const Grid3& b) {
  if (!a.same_layout(b)) throw Error(ErrorCode::DimensionMismatch, "grids have different layouts");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a.density()[i] - b.density()[i]);
  return s * a.cell_volume();
}

}  // namespace nonholo
