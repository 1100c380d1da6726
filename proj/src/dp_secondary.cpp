#include <algorithm>
#include <cmath>

#include "cascade/dp.hpp"
#include "cascade/errors.hpp"
#include "dp_detail.hpp"

namespace cascade {

namespace {

struct CellChoice {
  double value;
  Action action;
};

CellChoice choose(double stop, double positive, double shared, double own, bool avail,
                  const SolveOptions& opt) {
  const bool share = avail && opt.allow_sharing;
  double best_cont = own;
  Action cont = Action::Secondary;
  if (share && shared <= own) {
    best_cont = shared;
    cont = Action::Primary;
  }
  if (opt.allow_early_positive && positive <= stop && positive <= best_cont)
    return {positive, Action::Positive};
  if (best_cont < stop) return {best_cont, cont};
  return {stop, Action::Stop};
}

void check_inputs(const AppConfig& primary, const AppConfig& secondary,
                  std::span<const StageModel> shared) {
  primary.validate();
  secondary.validate();
  const std::size_t K = primary.stage_count();
  if (secondary.stage_count() != K)
    throw ConfigError("primary and secondary must have the same number of stages");
  if (shared.size() != K)
    throw ConfigError("secondary is missing a shared-feature model for some stage");
  for (std::size_t i = 0; i < K; ++i) {
    const auto& s = shared[i].robust;
    const auto& p = primary.stages[i].robust;
    if (s.bins() != p.bins())
      throw ConfigError("shared-feature model bins differ from the primary feature bins");
    for (std::size_t y = 0; y < s.bins(); ++y)
      if (s.in_support(y) && !p.in_support(y))
        throw ConfigError("shared-feature model has mass where the primary model has none");
  }
}

}  // namespace

Action SecondaryPolicy::decide_without(std::size_t stage, double belief) const {
  const std::size_t k = stage_count();
  if (stage == k) return belief >= tau[k] ? Action::Positive : Action::Stop;
  if (belief >= positive_tau[stage]) return Action::Positive;
  return belief >= decision_tau[stage] ? Action::Secondary : Action::Stop;
}

Action SecondaryPolicy::decide_with(std::size_t stage, double belief,
                                    double primary_belief) const {
  const std::size_t k = stage_count();
  if (stage == k) return decide_without(stage, belief);
  const std::size_t j = primary_grid.nearest(primary_belief);
  const double eta_j = decision_eta[stage][j];
  if (belief < eta_j) return Action::Stop;
  const std::size_t cols = primary_grid.size();
  std::size_t a = grid.nearest(belief);
  Action act = with_action[stage][a * cols + j];
  if (act == Action::Stop) {
    // Nearest row fell below the stop threshold; use the first continuing row.
    a = grid.nearest(eta_j);
    act = with_action[stage][a * cols + j];
  }
  return act;
}

SecondarySolution optimize_secondary(const AppConfig& primary, const AppConfig& secondary,
                                     std::span<const StageModel> shared,
                                     const PrimaryPolicy& primary_policy, double lambda,
                                     const Grid& grid, const Grid& primary_grid,
                                     const SolveOptions& options) {
  check_inputs(primary, secondary, shared);
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw ConfigError("lambda must be finite and nonnegative");
  const std::size_t K = secondary.stage_count();
  const std::size_t M2 = grid.size();
  const std::size_t M1 = primary_grid.size();
  const double cm = secondary.miss_cost;
  const double ca = secondary.fa_cost;

  SecondarySolution sol;
  SecondaryTables& t = sol.tables;
  t.grid = grid;
  t.primary_grid = primary_grid;
  t.lambda = lambda;
  t.without.assign(K + 1, std::vector<double>(M2));
  t.with.assign(K + 1, Matrix(M2, M1));
  t.own_continuation.assign(K, std::vector<double>(M2));
  t.shared_continuation.assign(K, Matrix(M2, M1));

  SecondaryPolicy& p = sol.policy;
  p.grid = grid;
  p.primary_grid = primary_grid;
  p.tau.assign(K + 1, kInf);
  p.decision_tau.assign(K + 1, kInf);
  p.positive_tau.assign(K + 1, kInf);
  p.eta.assign(K + 1, {});
  p.decision_eta.assign(K + 1, {});
  p.with_action.assign(K + 1, {});
  p.column_available.assign(K + 1, {});
  {
    const std::span<const StageModel> own(secondary.stages);
    if (options.allow_sharing) {
      const std::span<const StageModel> fam[] = {own, shared};
      p.bounds = belief_bounds(secondary.prior, fam);
    } else {
      const std::span<const StageModel> fam[] = {own};
      p.bounds = belief_bounds(secondary.prior, fam);
    }
  }
  p.tau[K] = p.decision_tau[K] = secondary.final_threshold();

  for (std::size_t a = 0; a < M2; ++a) {
    const double v = std::min(cm * grid[a], ca * (1.0 - grid[a]));
    t.without[K][a] = v;
    for (std::size_t j = 0; j < M1; ++j) t.with[K](a, j) = v;
  }

  for (std::size_t d = K; d-- > 0;) {
    const std::size_t next = d + 1;
    const detail::Kernel own(secondary.stage(next).robust);
    const detail::Kernel sh(shared[d].robust);
    const auto& prim_model = primary.stage(next).robust;
    const double own_cost = lambda * secondary.stage(next).cost_mJ;

    auto& Jo = t.own_continuation[d];
    for (std::size_t a = 0; a < M2; ++a)
      Jo[a] = own_cost + detail::expect(own, grid, t.without[next], grid[a]);

    // Shared draws move both posteriors; rows and columns separate per bin.
    const std::size_t L = sh.size();
    std::vector<Grid::Location> row_loc(M2 * L);
    std::vector<double> row_w(M2 * L);
    std::vector<Grid::Location> col_loc(M1 * L);
    for (std::size_t a = 0; a < M2; ++a)
      for (std::size_t y = 0; y < L; ++y) {
        row_w[a * L + y] = sh.evidence(y, grid[a]);
        row_loc[a * L + y] = grid.locate(detail::posterior(grid[a], sh.ratio[y]));
      }
    for (std::size_t j = 0; j < M1; ++j)
      for (std::size_t y = 0; y < L; ++y)
        col_loc[j * L + y] = primary_grid.locate(
            detail::posterior(primary_grid[j], prim_model.likelihood_ratio(sh.bins[y])));

    Matrix& Js = t.shared_continuation[d];
    const Matrix& Vn = t.with[next];
    for (std::size_t a = 0; a < M2; ++a)
      for (std::size_t j = 0; j < M1; ++j) {
        double acc = 0.0;
        for (std::size_t y = 0; y < L; ++y) {
          const double w = row_w[a * L + y];
          if (w == 0.0) continue;
          acc += w * detail::bilinear(Vn, row_loc[a * L + y], col_loc[j * L + y]);
        }
        Js(a, j) = acc;
      }

    if (d == 0) {
      t.without[0] = Jo;
      for (std::size_t a = 0; a < M2; ++a)
        for (std::size_t j = 0; j < M1; ++j)
          t.with[0](a, j) = options.allow_sharing ? std::min(Js(a, j), Jo[a]) : Jo[a];
      break;
    }

    // Primary-stopped branch.
    auto& Vw = t.without[d];
    for (std::size_t a = 0; a < M2; ++a)
      Vw[a] = choose(cm * grid[a], ca * (1.0 - grid[a]), kInf, Jo[a], false, options).value;
    {
      const std::size_t cont =
          detail::first_index(M2, [&](std::size_t a) { return Jo[a] < cm * grid[a]; });
      p.decision_tau[d] = detail::grid_value_or_inf(grid, cont);
      if (options.allow_early_positive) {
        const std::size_t pos = detail::first_index(M2, [&](std::size_t a) {
          const double pv = ca * (1.0 - grid[a]);
          return pv <= cm * grid[a] && pv <= Jo[a];
        });
        p.positive_tau[d] = detail::grid_value_or_inf(grid, pos);
      }
      p.tau[d] = detail::clamp_threshold(p.decision_tau[d], p.bounds.lo[d], p.bounds.hi[d]);
    }

    // Primary-running branch.
    auto& avail = p.column_available[d];
    avail.resize(M1);
    for (std::size_t j = 0; j < M1; ++j)
      avail[j] = primary_policy.decide(d, primary_grid[j]) == Action::Primary;
    auto& act = p.with_action[d];
    act.resize(M2 * M1);
    Matrix& V = t.with[d];
    for (std::size_t a = 0; a < M2; ++a)
      for (std::size_t j = 0; j < M1; ++j) {
        const CellChoice c =
            choose(cm * grid[a], ca * (1.0 - grid[a]), Js(a, j), Jo[a], avail[j] != 0, options);
        V(a, j) = c.value;
        act[a * M1 + j] = c.action;
      }
    auto& eta = p.eta[d];
    auto& deta = p.decision_eta[d];
    eta.resize(M1);
    deta.resize(M1);
    for (std::size_t j = 0; j < M1; ++j) {
      const std::size_t first =
          detail::first_index(M2, [&](std::size_t a) { return V(a, j) < cm * grid[a]; });
      deta[j] = detail::grid_value_or_inf(grid, first);
      eta[j] = detail::clamp_threshold(deta[j], p.bounds.lo[d], p.bounds.hi[d]);
    }
  }

  // Stage 0 evaluated exactly at the two priors.
  {
    const detail::Kernel own(secondary.stage(1).robust);
    const detail::Kernel sh(shared[0].robust);
    const auto& prim_model = primary.stage(1).robust;
    const double pi2 = secondary.prior;
    const double pi1 = primary.prior;
    t.v0_own = lambda * secondary.stage(1).cost_mJ + detail::expect(own, grid, t.without[1], pi2);
    double acc = 0.0;
    for (std::size_t y = 0; y < sh.size(); ++y) {
      const double w = sh.evidence(y, pi2);
      if (w == 0.0) continue;
      acc += w * detail::bilinear(
                     t.with[1], grid.locate(detail::posterior(pi2, sh.ratio[y])),
                     primary_grid.locate(detail::posterior(
                         pi1, prim_model.likelihood_ratio(sh.bins[y]))));
    }
    t.v0_shared = acc;
    if (options.allow_sharing && t.v0_shared <= t.v0_own) {
      p.stage0 = Action::Primary;
      t.v0 = t.v0_shared;
    } else {
      p.stage0 = Action::Secondary;
      t.v0 = t.v0_own;
    }
  }
  return sol;
}

}  // namespace cascade
