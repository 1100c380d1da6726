#pragma once

// The two-application system: wiring, joint solve and forward risk evaluation.

#include <vector>

#include "cascade/dp.hpp"

namespace cascade {

enum class Coupling { Twin, Independent };

const char* to_string(Coupling c);

/// Which conditionals generate features when a policy is evaluated.
enum class Measure { Robust, Nominal };

struct SystemModel {
  AppConfig primary;
  AppConfig secondary;
  std::vector<StageModel> shared;  // primary feature under the secondary target, per stage
  Coupling coupling = Coupling::Twin;

  std::size_t stage_count() const { return primary.stage_count(); }
  void validate() const;
};

/// Clone `app` as its own twin: identical secondary and shared models.
SystemModel make_twin(const AppConfig& app);

struct SystemSolution {
  double lambda = 0.0;
  PrimarySolution primary;
  SecondarySolution secondary;
};

SystemSolution solve_system(const SystemModel& system, double lambda, const Grid& primary_grid,
                            const Grid& secondary_grid, const SolveOptions& options = {});
inline SystemSolution solve_system(const SystemModel& system, double lambda, const Grid& grid,
                                   const SolveOptions& options = {}) {
  return solve_system(system, lambda, grid, grid, options);
}

struct SystemRisk {
  RiskBreakdown primary;
  RiskBreakdown secondary;
};

/// Forward propagation of the joint (target, belief) distribution over the
/// grid nodes; off-grid posteriors split their mass linearly onto neighbours.
SystemRisk eval_policy_risk(const SystemModel& system, const SystemSolution& solution,
                            Measure measure = Measure::Robust);

}  // namespace cascade
