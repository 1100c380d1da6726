#include "cascade/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cascade {

Grid Grid::uniform(std::size_t m) {
  if (m < 2) throw std::invalid_argument("grid needs at least 2 points");
  Grid g;
  g.points_.resize(m);
  const double step = 1.0 / static_cast<double>(m - 1);
  for (std::size_t i = 0; i < m; ++i) g.points_[i] = static_cast<double>(i) * step;
  g.points_.back() = 1.0;
  g.uniform_ = true;
  return g;
}

Grid Grid::from_points(std::vector<double> points) {
  for (double p : points)
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("grid point outside [0,1]");
  points.push_back(0.0);
  points.push_back(1.0);
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());
  Grid g;
  g.points_ = std::move(points);
  return g;
}

Grid::Location Grid::locate(double x) const {
  const std::size_t n = points_.size();
  if (x <= 0.0) return {0, 0.0};
  if (x >= 1.0) return {n - 1, 0.0};
  std::size_t i;
  if (uniform_) {
    const double scaled = x * static_cast<double>(n - 1);
    i = std::min(static_cast<std::size_t>(scaled), n - 2);
    // Guard against rounding in the scaled index.
    while (i > 0 && points_[i] > x) --i;
    while (i + 2 < n && points_[i + 1] <= x) ++i;
  } else {
    auto it = std::upper_bound(points_.begin(), points_.end(), x);
    i = static_cast<std::size_t>(it - points_.begin()) - 1;
    if (i >= n - 1) return {n - 1, 0.0};
  }
  const double lo = points_[i];
  const double hi = points_[i + 1];
  if (x == lo) return {i, 0.0};
  if (x == hi) return {i + 1, 0.0};
  return {i, (x - lo) / (hi - lo)};
}

double Grid::interpolate(std::span<const double> values, double x) const {
  return interpolate(values, locate(x));
}

std::size_t Grid::nearest(double x) const {
  const Location loc = locate(x);
  return loc.weight > 0.5 ? loc.index + 1 : loc.index;
}

}  // namespace cascade
