#pragma once

// Backward value iteration over quantized belief grids for the two-application
// cascade, threshold extraction, and the structural condition checks.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cascade/grid.hpp"
#include "cascade/models.hpp"
#include "cascade/robust.hpp"

namespace cascade {

struct AppConfig {
  std::string name;
  double prior = 0.5;
  double miss_cost = 1.0;
  double fa_cost = 1.0;
  std::vector<StageModel> stages;  // stage i is stages[i - 1]

  std::size_t stage_count() const noexcept { return stages.size(); }
  const StageModel& stage(std::size_t i) const { return stages.at(i - 1); }
  /// Throws ConfigError on K = 0, negative costs or a prior outside (0,1).
  void validate() const;
  /// C_A / (C_A + C_M), the closed-form final-stage threshold.
  double final_threshold() const { return fa_cost / (fa_cost + miss_cost); }
};

/// Decision alphabet: stop and declare negative, extract the primary feature
/// next, extract the secondary feature next, declare positive.
enum class Action : std::uint8_t { Stop = 0, Primary = 1, Secondary = 2, Positive = 3 };

const char* to_string(Action a);

struct SolveOptions {
  bool allow_sharing = true;         // false: secondary never selects the primary feature
  bool allow_early_positive = false;  // adds declare-positive at intermediate stages
};

/// Per-stage range of reachable posteriors, indexed by stage 0..K.
struct BeliefBounds {
  std::vector<double> lo;
  std::vector<double> hi;
};

/// Bounds for an application whose stage-i ratio can come from any of the
/// listed stage-model families (own features, shared features).
BeliefBounds belief_bounds(double prior,
                           std::span<const std::span<const StageModel>> families);

struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}
  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }
  /// Column c copied out.
  std::vector<double> column(std::size_t c) const;
};

// ---------------------------------------------------------------- primary

struct PrimaryPolicy {
  // All vectors are indexed by stage 0..K; entry 0 is unused.
  std::vector<double> tau;           // thresholds clamped into [lo, hi]; tau[K] closed form
  std::vector<double> decision_tau;  // unclamped grid thresholds, +inf = never continue
  std::vector<double> positive_tau;  // early-positive thresholds, +inf when disabled
  BeliefBounds bounds;

  std::size_t stage_count() const { return tau.size() - 1; }
  /// Action at stage i (1..K) for posterior `belief`.
  Action decide(std::size_t stage, double belief) const;
};

struct PrimaryTables {
  Grid grid;
  double lambda = 0.0;
  std::vector<std::vector<double>> value;         // V_0..V_K on the grid
  std::vector<std::vector<double>> continuation;  // index d = 0..K-1: lambda D_{d+1} + E[V_{d+1}]
  double v0 = 0.0;                                 // V_0 evaluated at the prior
};

struct PrimarySolution {
  PrimaryTables tables;
  PrimaryPolicy policy;
};

PrimarySolution optimize_primary(const AppConfig& app, double lambda, const Grid& grid,
                                 const SolveOptions& options = {});

// -------------------------------------------------------------- secondary

struct SecondaryPolicy {
  Action stage0 = Action::Primary;
  // Primary-stopped branch, indexed by stage 0..K (entry 0 unused).
  std::vector<double> tau;
  std::vector<double> decision_tau;
  std::vector<double> positive_tau;
  // Primary-available branch, per stage 1..K-1 and primary-grid column.
  std::vector<std::vector<double>> eta;
  std::vector<std::vector<double>> decision_eta;
  std::vector<std::vector<Action>> with_action;  // rows (secondary grid) x columns
  std::vector<std::vector<std::uint8_t>> column_available;
  Grid grid;
  Grid primary_grid;
  BeliefBounds bounds;

  std::size_t stage_count() const { return tau.size() - 1; }
  /// Primary has stopped (or the secondary left the shared route).
  Action decide_without(std::size_t stage, double belief) const;
  /// Primary will extract its next feature and the secondary has been sharing.
  Action decide_with(std::size_t stage, double belief, double primary_belief) const;
};

struct SecondaryTables {
  Grid grid;          // secondary posterior axis (rows)
  Grid primary_grid;  // primary posterior axis (columns)
  double lambda = 0.0;
  // Primary-stopped value V_i(pi2), i = 0..K; entry 0 is lambda D_1 + E[V_1].
  std::vector<std::vector<double>> without;
  // Primary-running value V_i(pi2, pi1), i = 0..K; entry 0 is the stage-0 minimum.
  std::vector<Matrix> with;
  std::vector<std::vector<double>> own_continuation;  // d = 0..K-1, includes lambda D_{d+1}
  std::vector<Matrix> shared_continuation;            // d = 0..K-1, zero marginal cost
  double v0 = 0.0;
  double v0_shared = 0.0;
  double v0_own = 0.0;
};

struct SecondarySolution {
  SecondaryTables tables;
  SecondaryPolicy policy;
};

/// `shared[i-1]` is the likelihood model of the primary stage-i feature under
/// the secondary's target. The secondary's state carries the primary posterior
/// and an availability flag; sharing updates both posteriors with the same draw.
SecondarySolution optimize_secondary(const AppConfig& primary, const AppConfig& secondary,
                                     std::span<const StageModel> shared,
                                     const PrimaryPolicy& primary_policy, double lambda,
                                     const Grid& grid, const Grid& primary_grid,
                                     const SolveOptions& options = {});

// ----------------------------------------------------------------- checks

struct SharingCheck {
  std::vector<bool> pass;                // stage 1..K (entry 0 unused)
  std::vector<double> margin;            // worst lambda D_i - (E[shared] - E[own])
  std::vector<double> sufficient_margin;  // lambda D_i - C_M (E[pi(Y1)] - E[pi(Y2)])
  bool all_pass() const;
};

SharingCheck check_sharing_condition(const SecondarySolution& solution,
                                     const AppConfig& primary, const AppConfig& secondary,
                                     std::span<const StageModel> shared, double lambda);

struct CascadeOptimalityCheck {
  std::vector<bool> pass;                   // stage 1..K-1
  std::vector<double> positive_threshold;   // max{pi : V - C_A (1 - pi) < 0}
  std::vector<double> upper_bound;          // pi_U of the stage
  bool all_pass() const;
};

CascadeOptimalityCheck check_cascade_optimality(const PrimarySolution& solution,
                                                const AppConfig& app);
CascadeOptimalityCheck check_cascade_optimality(const SecondarySolution& solution,
                                                const AppConfig& app);

/// Structural properties of a value function on its grid.
struct ValueShape {
  double max_concavity_violation = 0.0;  // max of chord - value at interior points
  double max_slope = 0.0;                // largest forward difference quotient
  double value_at_zero = 0.0;
  double min_value = 0.0;
  bool finite = true;
};
/// Points closer than `min_spacing` to the previously kept point are skipped,
/// so near-duplicate nodes of reachable-belief grids do not turn rounding
/// noise into difference quotients.
ValueShape value_shape(const Grid& grid, std::span<const double> values,
                       double min_spacing = 0.0);

// ---------------------------------------------------------- risk / forward

struct RiskBreakdown {
  double miss = 0.0;               // C_M-weighted miss mass, all stages
  double false_alarm = 0.0;        // C_A-weighted false-alarm mass
  double weighted_resource = 0.0;  // lambda * resource_mJ
  double total = 0.0;
  double resource_mJ = 0.0;        // expected extraction cost per frame
  std::vector<double> continue_prob;  // P(feature i+1 extracted | decision at stage i), i = 0..K-1
};

}  // namespace cascade
