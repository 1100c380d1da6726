#pragma once

// JSON system description: both applications, shared-feature models, grid,
// either a fixed lambda or an energy budget, and simulation settings.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cascade/budget.hpp"
#include "cascade/system.hpp"

namespace cascade {

struct SystemConfig {
  std::string name;
  SystemModel system;
  std::size_t grid = 100;
  std::optional<double> lambda;
  std::optional<BudgetSpec> budget;
  SolveOptions options;
  std::uint64_t seed = 1;
  std::uint64_t trials = 100000;
  std::vector<double> sweep_priors;

  /// Throws ConfigError unless exactly one of lambda / budget is set.
  void validate() const;
};

/// Equal-width quantization of N(0,1) against N(d', 1) over [-4, d' + 4];
/// tail mass is folded into the end bins.
ConditionalPmf gaussian_pmf(std::size_t bins, double d_prime);

SystemConfig parse_config(const std::string& json_text);
SystemConfig load_config(const std::string& path);

/// Canonical JSON: every stage carries its resolved nominal model and cost,
/// plus the derived robust model and breakpoints for reference.
std::string config_to_json(const SystemConfig& config);

}  // namespace cascade
