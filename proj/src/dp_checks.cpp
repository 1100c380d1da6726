#include <algorithm>
#include <cmath>
#include <vector>

#include "cascade/dp.hpp"
#include "dp_detail.hpp"

namespace cascade {

namespace {

// max{pi on the grid : V(pi) - C_A (1 - pi) < 0}, or -inf when empty.
double positive_threshold(const Grid& g, std::span<const double> v, double ca) {
  double out = -kInf;
  for (std::size_t k = 0; k < g.size(); ++k)
    if (v[k] - ca * (1.0 - g[k]) < 0.0) out = g[k];
  return out;
}

}  // namespace

bool SharingCheck::all_pass() const {
  return std::all_of(pass.begin() + 1, pass.end(), [](bool b) { return b; });
}

bool CascadeOptimalityCheck::all_pass() const {
  return pass.size() <= 1 ||
         std::all_of(pass.begin() + 1, pass.end(), [](bool b) { return b; });
}

SharingCheck check_sharing_condition(const SecondarySolution& solution,
                                     const AppConfig& /*primary*/, const AppConfig& secondary,
                                     std::span<const StageModel> shared, double lambda) {
  const auto& t = solution.tables;
  const auto& p = solution.policy;
  const std::size_t K = secondary.stage_count();
  const std::size_t M2 = t.grid.size();
  const std::size_t M1 = t.primary_grid.size();
  SharingCheck out;
  out.pass.assign(K + 1, true);
  out.margin.assign(K + 1, kInf);
  out.sufficient_margin.assign(K + 1, kInf);

  for (std::size_t d = 0; d < K; ++d) {
    const std::size_t i = d + 1;
    const auto& Jo = t.own_continuation[d];
    const Matrix& Js = t.shared_continuation[d];
    double worst = kInf;
    for (std::size_t j = 0; j < M1; ++j) {
      if (d > 0 && !p.column_available[d][j]) continue;
      for (std::size_t a = 0; a < M2; ++a) worst = std::min(worst, Jo[a] - Js(a, j));
    }
    out.margin[i] = worst;
    out.pass[i] = worst >= 0.0;

    // Sufficient (slope-bound) form, each expectation under its own evidence.
    const detail::Kernel own(secondary.stage(i).robust);
    const detail::Kernel sh(shared[d].robust);
    const double budget = lambda * secondary.stage(i).cost_mJ;
    double worst_suff = kInf;
    for (std::size_t a = 0; a < M2; ++a) {
      const double x = t.grid[a];
      double e_shared = 0.0;
      for (std::size_t y = 0; y < sh.size(); ++y)
        e_shared += sh.evidence(y, x) * detail::posterior(x, sh.ratio[y]);
      double e_own = 0.0;
      for (std::size_t y = 0; y < own.size(); ++y)
        e_own += own.evidence(y, x) * detail::posterior(x, own.ratio[y]);
      worst_suff = std::min(worst_suff, budget - secondary.miss_cost * (e_shared - e_own));
    }
    out.sufficient_margin[i] = worst_suff;
  }
  return out;
}

CascadeOptimalityCheck check_cascade_optimality(const PrimarySolution& solution,
                                                const AppConfig& app) {
  const std::size_t K = app.stage_count();
  CascadeOptimalityCheck out;
  out.pass.assign(K, true);
  out.positive_threshold.assign(K, kInf);
  out.upper_bound.assign(K, 0.0);
  for (std::size_t i = 1; i < K; ++i) {
    const double thr =
        positive_threshold(solution.tables.grid, solution.tables.value[i], app.fa_cost);
    out.positive_threshold[i] = thr;
    out.upper_bound[i] = solution.policy.bounds.hi[i];
    out.pass[i] = thr > out.upper_bound[i];
  }
  return out;
}

CascadeOptimalityCheck check_cascade_optimality(const SecondarySolution& solution,
                                                const AppConfig& app) {
  const std::size_t K = app.stage_count();
  const auto& t = solution.tables;
  CascadeOptimalityCheck out;
  out.pass.assign(K, true);
  out.positive_threshold.assign(K, kInf);
  out.upper_bound.assign(K, 0.0);
  for (std::size_t i = 1; i < K; ++i) {
    double thr = positive_threshold(t.grid, t.without[i], app.fa_cost);
    for (std::size_t j = 0; j < t.primary_grid.size(); ++j) {
      if (!solution.policy.column_available[i][j]) continue;
      const auto col = t.with[i].column(j);
      thr = std::min(thr, positive_threshold(t.grid, col, app.fa_cost));
    }
    out.positive_threshold[i] = thr;
    out.upper_bound[i] = solution.policy.bounds.hi[i];
    out.pass[i] = thr > out.upper_bound[i];
  }
  return out;
}

ValueShape value_shape(const Grid& grid, std::span<const double> v, double min_spacing) {
  ValueShape s;
  s.value_at_zero = v[0];
  s.min_value = *std::min_element(v.begin(), v.end());
  s.max_slope = -kInf;
  for (double x : v) s.finite = s.finite && std::isfinite(x);
  std::vector<std::size_t> keep = {0};
  for (std::size_t k = 1; k < grid.size(); ++k)
    if (grid[k] - grid[keep.back()] >= min_spacing || k + 1 == grid.size()) keep.push_back(k);
  if (keep.size() > 2 && grid[keep.back()] - grid[keep[keep.size() - 2]] < min_spacing)
    keep.erase(keep.end() - 2);
  for (std::size_t n = 0; n + 1 < keep.size(); ++n) {
    const std::size_t k = keep[n], k1 = keep[n + 1];
    s.max_slope = std::max(s.max_slope, (v[k1] - v[k]) / (grid[k1] - grid[k]));
  }
  for (std::size_t n = 1; n + 1 < keep.size(); ++n) {
    const std::size_t k0 = keep[n - 1], k = keep[n], k1 = keep[n + 1];
    const double w = (grid[k] - grid[k0]) / (grid[k1] - grid[k0]);
    const double chord = (1.0 - w) * v[k0] + w * v[k1];
    s.max_concavity_violation = std::max(s.max_concavity_violation, chord - v[k]);
  }
  return s;
}

}  // namespace cascade
