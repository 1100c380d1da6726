#include "cascade/budget.hpp"

#include <cmath>
#include <string>

#include "cascade/errors.hpp"

namespace cascade {

double energy_mJ(const CostTerm& t) { return t.power_mW * t.time_ms / 1000.0; }

double energy_mJ(std::span<const CostTerm> terms) {
  double e = 0.0;
  for (const auto& t : terms) e += energy_mJ(t);
  return e;
}

void BudgetSpec::validate() const {
  if (!(baseline_mJ >= 0.0) || !std::isfinite(baseline_mJ))
    throw ConfigError("baseline_mJ must be finite and nonnegative");
  if (!(budget_mJ > baseline_mJ) || !std::isfinite(budget_mJ))
    throw ConfigError("budget_mJ must be finite and exceed baseline_mJ");
  if (!(lambda_lo >= 0.0) || !(lambda_lo < lambda_hi) || !std::isfinite(lambda_hi))
    throw ConfigError("lambda bracket must satisfy 0 <= lo < hi < inf");
  if (!(tolerance > 0.0)) throw ConfigError("tolerance must be positive");
  if (max_iterations < 1) throw ConfigError("max_iterations must be at least 1");
}

ResourceUsage expected_resource(const SystemModel& system, const SystemSolution& solution,
                                double baseline_mJ) {
  const SystemRisk r = eval_policy_risk(system, solution, Measure::Robust);
  ResourceUsage u;
  u.primary_mJ = r.primary.resource_mJ;
  u.secondary_mJ = r.secondary.resource_mJ;
  u.baseline_mJ = baseline_mJ;
  u.total_mJ = u.primary_mJ + u.secondary_mJ + baseline_mJ;
  return u;
}

LambdaResult solve_lambda(const BudgetSpec& spec, const SystemModel& system,
                          const Grid& primary_grid, const Grid& secondary_grid,
                          const SolveOptions& options) {
  spec.validate();
  const double target = spec.target_mJ();
  auto evaluate = [&](double lambda) {
    LambdaResult r;
    r.lambda = lambda;
    r.solution = solve_system(system, lambda, primary_grid, secondary_grid, options);
    r.usage = expected_resource(system, r.solution, spec.baseline_mJ);
    r.within_tolerance = std::abs(r.usage.policy_mJ() - target) <= spec.tolerance * target;
    return r;
  };

  LambdaResult zero = evaluate(0.0);
  if (zero.usage.policy_mJ() <= target) {
    zero.slack = true;
    return zero;
  }
  LambdaResult hi = evaluate(spec.lambda_hi);
  if (hi.usage.policy_mJ() > target)
    throw BracketError("bracket failure: consumption " + std::to_string(hi.usage.total_mJ) +
                       " mJ at lambda " + std::to_string(spec.lambda_hi) +
                       " exceeds the budget");
  double lo = spec.lambda_lo;
  if (lo > 0.0) {
    LambdaResult l = evaluate(lo);
    if (l.usage.policy_mJ() <= target) return l;
  }

  // Invariant: E(lo) > target >= E(hi.lambda).
  int it = 0;
  while (it < spec.max_iterations && !hi.within_tolerance) {
    ++it;
    const double mid = 0.5 * (lo + hi.lambda);
    if (!(mid > lo && mid < hi.lambda)) break;
    LambdaResult m = evaluate(mid);
    if (m.usage.policy_mJ() <= target) hi = std::move(m);
    else lo = mid;
  }
  hi.iterations = it;
  return hi;
}

}  // namespace cascade
