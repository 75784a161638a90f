#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace qoct {

/// Uniform 1-D position grid together with the wavenumbers of the matching
/// periodic spectral basis, in standard DFT order.
struct SpatialGrid {
  double r_min = 0.0;
  double dr = 0.0;
  std::size_t n_r = 0;
  std::vector<double> points;   ///< R_j = r_min + j*dr
  std::vector<double> momenta;  ///< k_j, spacing 2*pi/(n_r*dr), DFT-ordered

  double r_max() const { return points.back(); }
  double length() const { return dr * static_cast<double>(n_r); }

  /// Index of the grid point closest to r (ties resolve to the lower index).
  std::size_t nearest_index(double r) const {
    if (r <= points.front()) return 0;
    if (r >= points.back()) return n_r - 1;
    const auto j = static_cast<std::size_t>(std::floor((r - r_min) / dr));
    const double lo = points[j];
    const double hi = points[j + 1];
    return (r - lo) <= (hi - r) ? j : j + 1;
  }
};

inline SpatialGrid build_grid(double r_min, double dr, std::size_t n_r) {
  if (!(dr > 0.0)) throw std::invalid_argument("build_grid: dr must be positive");
  if (n_r < 8) throw std::invalid_argument("build_grid: n_r must be at least 8");
  SpatialGrid g;
  g.r_min = r_min;
  g.dr = dr;
  g.n_r = n_r;
  g.points.resize(n_r);
  g.momenta.resize(n_r);
  const double dk = 2.0 * std::numbers::pi / (dr * static_cast<double>(n_r));
  for (std::size_t j = 0; j < n_r; ++j) {
    g.points[j] = r_min + dr * static_cast<double>(j);
    const auto sj = static_cast<std::ptrdiff_t>(j);
    const auto sn = static_cast<std::ptrdiff_t>(n_r);
    g.momenta[j] = dk * static_cast<double>(sj < (sn + 1) / 2 ? sj : sj - sn);
  }
  return g;
}

}  // namespace qoct
