#include <algorithm>
#include <cmath>

#include "cascade/dp.hpp"
#include "cascade/errors.hpp"
#include "dp_detail.hpp"

namespace cascade {

const char* to_string(Action a) {
  switch (a) {
    case Action::Stop: return "0";
    case Action::Primary: return "F1";
    case Action::Secondary: return "F2";
    case Action::Positive: return "1";
  }
  return "?";
}

void AppConfig::validate() const {
  if (stages.empty()) throw ConfigError(name + ": at least one stage is required");
  if (!(miss_cost >= 0.0) || !(fa_cost >= 0.0)) throw ConfigError(name + ": negative cost");
  if (!(miss_cost + fa_cost > 0.0)) throw ConfigError(name + ": costs are both zero");
  if (!(prior > 0.0 && prior < 1.0)) throw ConfigError(name + ": prior must lie in (0,1)");
  for (const auto& s : stages) {
    if (s.robust.bins() != s.nominal.bins() || s.nominal.bins() < 2)
      throw ConfigError(name + ": stage model not prepared");
    if (!(s.cost_mJ >= 0.0)) throw ConfigError(name + ": negative stage cost");
  }
}

std::vector<double> Matrix::column(std::size_t c) const {
  std::vector<double> out(rows);
  for (std::size_t r = 0; r < rows; ++r) out[r] = (*this)(r, c);
  return out;
}

BeliefBounds belief_bounds(double prior,
                           std::span<const std::span<const StageModel>> families) {
  std::size_t k = 0;
  for (auto f : families) k = std::max(k, f.size());
  BeliefBounds b;
  b.lo.assign(k + 1, prior);
  b.hi.assign(k + 1, prior);
  for (std::size_t i = 1; i <= k; ++i) {
    double lmin = kInf;
    double lmax = 0.0;
    // Realized least-favorable ratios; these sit inside the breakpoints
    // whenever eps0 = eps1 and remain valid when they differ.
    for (auto f : families) {
      if (f.size() < i) continue;
      const ConditionalPmf& m = f[i - 1].robust;
      for (std::size_t y = 0; y < m.bins(); ++y) {
        if (!m.in_support(y)) continue;
        lmin = std::min(lmin, m.likelihood_ratio(y));
        lmax = std::max(lmax, m.likelihood_ratio(y));
      }
    }
    b.lo[i] = detail::posterior(b.lo[i - 1], lmin);
    b.hi[i] = detail::posterior(b.hi[i - 1], lmax);
  }
  return b;
}

Action PrimaryPolicy::decide(std::size_t stage, double belief) const {
  const std::size_t k = stage_count();
  if (stage == k) return belief >= tau[k] ? Action::Positive : Action::Stop;
  if (belief >= positive_tau[stage]) return Action::Positive;
  return belief >= decision_tau[stage] ? Action::Primary : Action::Stop;
}

PrimarySolution optimize_primary(const AppConfig& app, double lambda, const Grid& grid,
                                 const SolveOptions& options) {
  app.validate();
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw ConfigError("lambda must be finite and nonnegative");
  const std::size_t K = app.stage_count();
  const std::size_t M = grid.size();
  const double cm = app.miss_cost;
  const double ca = app.fa_cost;

  PrimarySolution sol;
  PrimaryTables& t = sol.tables;
  t.grid = grid;
  t.lambda = lambda;
  t.value.assign(K + 1, std::vector<double>(M));
  t.continuation.assign(K, std::vector<double>(M));

  for (std::size_t k = 0; k < M; ++k) t.value[K][k] = std::min(cm * grid[k], ca * (1.0 - grid[k]));

  PrimaryPolicy& p = sol.policy;
  p.tau.assign(K + 1, kInf);
  p.decision_tau.assign(K + 1, kInf);
  p.positive_tau.assign(K + 1, kInf);
  const StageModel* own = app.stages.data();
  const std::span<const StageModel> fam[] = {std::span<const StageModel>(own, K)};
  p.bounds = belief_bounds(app.prior, fam);
  p.tau[K] = p.decision_tau[K] = app.final_threshold();

  for (std::size_t i = K; i-- > 0;) {
    const detail::Kernel kernel(app.stage(i + 1).robust);
    const double step_cost = lambda * app.stage(i + 1).cost_mJ;
    auto& J = t.continuation[i];
    for (std::size_t k = 0; k < M; ++k)
      J[k] = step_cost + detail::expect(kernel, grid, t.value[i + 1], grid[k]);
    if (i == 0) {
      t.value[0] = J;
      break;
    }
    auto& V = t.value[i];
    for (std::size_t k = 0; k < M; ++k) {
      double v = std::min(cm * grid[k], J[k]);
      if (options.allow_early_positive) v = std::min(v, ca * (1.0 - grid[k]));
      V[k] = v;
    }
    const std::size_t cont =
        detail::first_index(M, [&](std::size_t k) { return J[k] < cm * grid[k]; });
    p.decision_tau[i] = detail::grid_value_or_inf(grid, cont);
    if (options.allow_early_positive) {
      const std::size_t pos = detail::first_index(M, [&](std::size_t k) {
        const double pv = ca * (1.0 - grid[k]);
        return pv <= cm * grid[k] && pv <= J[k];
      });
      p.positive_tau[i] = detail::grid_value_or_inf(grid, pos);
    }
    p.tau[i] = detail::clamp_threshold(p.decision_tau[i], p.bounds.lo[i], p.bounds.hi[i]);
  }

  const detail::Kernel first(app.stage(1).robust);
  t.v0 = lambda * app.stage(1).cost_mJ + detail::expect(first, grid, t.value[1], app.prior);
  return sol;
}

}  // namespace cascade
