#pragma once

// Monte Carlo execution of policy pairs, exact enumeration oracles for tiny
// instances, and the twin-comparison experiment.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "cascade/budget.hpp"
#include "cascade/system.hpp"

namespace cascade {

// ------------------------------------------------------------ Monte Carlo

struct Estimate {
  double mean = 0.0;
  double stderr_ = 0.0;
};

struct AppStats {
  Estimate miss;         // C_M-weighted
  Estimate false_alarm;  // C_A-weighted
  Estimate resource_mJ;
  Estimate risk;         // miss + false alarm + lambda * resource, per trial
};

struct SimOptions {
  std::uint64_t trials = 100000;
  std::uint64_t seed = 1;
  unsigned threads = 0;  // 0: hardware concurrency
};

struct SimResult {
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;
  double lambda = 0.0;
  AppStats primary;
  AppStats secondary;
  Estimate energy_mJ;  // both applications, baseline excluded
};

/// One frame executed jointly. Actions are indexed by decision stage 0..stop;
/// entry 0 is the feature chosen for stage 1.
struct TrialOutcome {
  std::uint64_t trial = 0;
  int x1 = 0;
  int x2 = 0;
  std::vector<Action> actions1;
  std::vector<Action> actions2;
  int xhat1 = 0;
  int xhat2 = 0;
  std::size_t stop1 = 0;  // stage at which the primary decided
  std::size_t stop2 = 0;
  double energy1_mJ = 0.0;
  double energy2_mJ = 0.0;
};

/// Features are drawn from the nominal models; beliefs always update with the
/// least-favorable ratios the policies were designed for.
TrialOutcome run_trial(const SystemModel& system, const SystemSolution& solution,
                       std::uint64_t seed, std::uint64_t trial);

/// Deterministic for fixed (system, solution, trials, seed) at any thread count.
SimResult simulate(const SystemModel& system, const SystemSolution& solution,
                   const SimOptions& options);

// ---------------------------------------------------------------- oracles

struct OracleLimits {
  std::size_t max_stages = 3;
  std::size_t max_bins = 4;
  std::uint64_t max_policies = 10'000'000;
};

/// Every posterior reachable from `prior`, stages 0..K, when the stage-i ratio
/// may come from any family's stage-i model. Result is indexed by stage.
std::vector<std::vector<double>> reachable_beliefs(
    double prior, std::span<const std::span<const StageModel>> families);

struct ExactGrids {
  Grid primary;
  Grid secondary;
};

/// Grids containing every reachable posterior of both applications, so the DP
/// never interpolates.
ExactGrids reachable_grids(const SystemModel& system, const SolveOptions& options = {});

using PrimaryRule = std::function<Action(std::size_t stage, double belief)>;

struct OracleResult {
  double primary_risk = 0.0;
  std::vector<double> primary_thresholds;  // stage 1..K (entry 0 unused)
  double secondary_risk = 0.0;
  std::uint64_t primary_policies = 0;
};

/// Primary: every threshold vector over the reachable beliefs (plus +inf),
/// each scored by summing over all feature outcomes. Secondary: exhaustive
/// search of its decision tree given the primary's rule, every stage-0 choice
/// and every branch included. Throws EnumerationCapError beyond `limits`.
OracleResult brute_force_optimum(const SystemModel& system, double lambda,
                                 const PrimaryRule& primary_rule,
                                 const SolveOptions& options = {},
                                 const OracleLimits& limits = {});

struct AugmentedResult {
  double primary_risk = 0.0;
  double secondary_risk = 0.0;
};

/// Optimum when declare-positive is also allowed at intermediate stages.
AugmentedResult augmented_optimum(const SystemModel& system, double lambda,
                                  const PrimaryRule& primary_rule,
                                  const SolveOptions& options = {},
                                  const OracleLimits& limits = {});

/// Minimum secondary risk over every deterministic history-to-action map,
/// each map scored independently. Feasible only for K <= 2 and 2 bins.
double enumerate_secondary_policies(const SystemModel& system, double lambda,
                                    const PrimaryRule& primary_rule,
                                    const SolveOptions& options = {},
                                    const OracleLimits& limits = {});

/// Risk of the given policies by summing over every feature outcome.
SystemRisk exact_policy_risk(const SystemModel& system, const SystemSolution& solution,
                             Measure measure = Measure::Robust,
                             const OracleLimits& limits = {});

// -------------------------------------------------------------- twin study

struct TwinRow {
  double prior = 0.0;
  double E1 = 0.0;
  double E2 = 0.0;
  double saving = 0.0;  // E1 / E2, +inf when E2 = 0
  double miss1 = 0.0;
  double fa1 = 0.0;
  double risk1 = 0.0;
  double detect2_shared = 0.0;  // miss + false alarm, sharing allowed
  double risk2_shared = 0.0;    // optimal Lagrangian risk, sharing allowed
  double detect2_ablated = 0.0;
  double risk2_ablated = 0.0;
  double E2_ablated = 0.0;
};

struct TwinReport {
  double lambda = 0.0;
  std::size_t grid_size = 0;
  std::vector<TwinRow> rows;
};

/// For each secondary prior p: the primary quantities at prior p, and the
/// secondary quantities averaged over primary priors drawn from the sweep.
TwinReport twin_experiment(const AppConfig& base, double lambda, std::span<const double> priors,
                           const Grid& grid, const SolveOptions& options = {});

}  // namespace cascade
