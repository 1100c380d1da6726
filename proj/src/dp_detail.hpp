#pragma once

// Internal helpers shared by the backward and forward passes.

#include <cstddef>
#include <limits>
#include <vector>

#include "cascade/dp.hpp"

namespace cascade::detail {

/// Support bins of one stage model with their ratios.
struct Kernel {
  std::vector<std::size_t> bins;
  std::vector<double> p0;
  std::vector<double> p1;
  std::vector<double> ratio;

  explicit Kernel(const ConditionalPmf& m) {
    for (std::size_t y = 0; y < m.bins(); ++y) {
      if (!m.in_support(y)) continue;
      bins.push_back(y);
      p0.push_back(m.p0(y));
      p1.push_back(m.p1(y));
      ratio.push_back(m.likelihood_ratio(y));
    }
  }
  std::size_t size() const { return bins.size(); }
  double evidence(std::size_t k, double pi) const { return p1[k] * pi + p0[k] * (1.0 - pi); }
};

/// E[V(posterior)] from belief x under `k`, with V linearly interpolated.
inline double expect(const Kernel& k, const Grid& grid, const std::vector<double>& v, double x) {
  double acc = 0.0;
  for (std::size_t y = 0; y < k.size(); ++y) {
    const double w = k.evidence(y, x);
    if (w == 0.0) continue;
    acc += w * Grid::interpolate(v, grid.locate(posterior(x, k.ratio[y])));
  }
  return acc;
}

inline double bilinear(const Matrix& m, Grid::Location r, Grid::Location c) {
  const auto at = [&](std::size_t i, std::size_t j) { return m(i, j); };
  double top = at(r.index, c.index);
  if (c.weight != 0.0) top = (1.0 - c.weight) * top + c.weight * at(r.index, c.index + 1);
  if (r.weight == 0.0) return top;
  double bottom = at(r.index + 1, c.index);
  if (c.weight != 0.0)
    bottom = (1.0 - c.weight) * bottom + c.weight * at(r.index + 1, c.index + 1);
  return (1.0 - r.weight) * top + r.weight * bottom;
}

/// First grid index at which `pred` holds, or the grid size.
template <class Pred>
std::size_t first_index(std::size_t n, Pred&& pred) {
  for (std::size_t k = 0; k < n; ++k)
    if (pred(k)) return k;
  return n;
}

inline double grid_value_or_inf(const Grid& g, std::size_t k) {
  return k < g.size() ? g[k] : std::numeric_limits<double>::infinity();
}

inline double clamp_threshold(double t, double lo, double hi) {
  return std::max(lo, std::min(hi, t));
}

}  // namespace cascade::detail
