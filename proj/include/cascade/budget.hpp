#pragma once

// Expected per-frame resource use and the Lagrange multiplier that meets a budget.

#include <span>

#include "cascade/system.hpp"

namespace cascade {

/// One power draw sustained for a duration; energy is power_mW * time_ms / 1000 mJ.
struct CostTerm {
  double power_mW = 0.0;
  double time_ms = 0.0;
};

double energy_mJ(const CostTerm& t);
double energy_mJ(std::span<const CostTerm> terms);

struct BudgetSpec {
  double budget_mJ = 0.0;
  double baseline_mJ = 0.0;  // always-on cost, outside the Lagrangian
  double lambda_lo = 0.0;
  double lambda_hi = 1.0;
  double tolerance = 1e-3;  // relative, on consumption
  int max_iterations = 60;

  double target_mJ() const { return budget_mJ - baseline_mJ; }
  /// Throws ConfigError unless budget > baseline >= 0 and lo < hi.
  void validate() const;
};

struct ResourceUsage {
  double primary_mJ = 0.0;    // D_1 + sum D_{i+1} P(primary extracts i+1)
  double secondary_mJ = 0.0;  // sum D_{i+1} P(secondary falls back to its own feature)
  double baseline_mJ = 0.0;
  double total_mJ = 0.0;
  double policy_mJ() const { return primary_mJ + secondary_mJ; }
};

ResourceUsage expected_resource(const SystemModel& system, const SystemSolution& solution,
                                double baseline_mJ = 0.0);

struct LambdaResult {
  double lambda = 0.0;
  ResourceUsage usage;
  bool slack = false;             // lambda = 0 already meets the budget
  bool within_tolerance = false;  // |E - target| <= tolerance * target
  int iterations = 0;
  SystemSolution solution;
};

/// Bisection for the smallest bracketed lambda whose consumption is at most
/// the target. Throws BracketError when even lambda_hi overspends.
LambdaResult solve_lambda(const BudgetSpec& spec, const SystemModel& system,
                          const Grid& primary_grid, const Grid& secondary_grid,
                          const SolveOptions& options = {});

}  // namespace cascade
