#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace cascade {

/// Sorted belief grid on [0, 1] that always contains both endpoints.
/// Uniform grids locate points in O(1); general grids use binary search.
class Grid {
 public:
  Grid() = default;

  /// [0, 1/(M-1), ..., 1]; M >= 2.
  static Grid uniform(std::size_t m);
  /// Arbitrary points in [0,1]; sorted, deduplicated, endpoints added.
  static Grid from_points(std::vector<double> points);

  std::size_t size() const noexcept { return points_.size(); }
  double operator[](std::size_t i) const { return points_[i]; }
  std::span<const double> points() const noexcept { return points_; }
  bool is_uniform() const noexcept { return uniform_; }

  /// Linear interpolation weights: x = (1 - w) g[index] + w g[index + 1].
  struct Location {
    std::size_t index;
    double weight;
  };
  Location locate(double x) const;

  /// Piecewise-linear interpolant of `values` (one per grid point) at x.
  double interpolate(std::span<const double> values, double x) const;
  static double interpolate(std::span<const double> values, Location loc) {
    return loc.weight == 0.0 ? values[loc.index]
                             : (1.0 - loc.weight) * values[loc.index] +
                                   loc.weight * values[loc.index + 1];
  }

  /// Index of the grid point closest to x.
  std::size_t nearest(double x) const;

 private:
  std::vector<double> points_;
  bool uniform_ = false;
};

}  // namespace cascade
