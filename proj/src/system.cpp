#include "cascade/system.hpp"

#include "cascade/errors.hpp"

namespace cascade {

const char* to_string(Coupling c) { return c == Coupling::Twin ? "twin" : "independent"; }

void SystemModel::validate() const {
  primary.validate();
  secondary.validate();
  if (secondary.stage_count() != primary.stage_count())
    throw ConfigError("primary and secondary must have the same number of stages");
  if (shared.size() != primary.stage_count())
    throw ConfigError("secondary is missing a shared-feature model for some stage");
  if (coupling == Coupling::Twin) {
    for (std::size_t i = 0; i < shared.size(); ++i)
      if (!(shared[i].nominal == primary.stages[i].nominal))
        throw ConfigError("twin coupling requires shared models identical to the primary's");
  }
}

SystemModel make_twin(const AppConfig& app) {
  SystemModel s;
  s.primary = app;
  s.secondary = app;
  s.primary.name = "primary";
  s.secondary.name = "secondary";
  s.shared = app.stages;
  s.coupling = Coupling::Twin;
  return s;
}

SystemSolution solve_system(const SystemModel& system, double lambda, const Grid& primary_grid,
                            const Grid& secondary_grid, const SolveOptions& options) {
  system.validate();
  SystemSolution out;
  out.lambda = lambda;
  out.primary = optimize_primary(system.primary, lambda, primary_grid, options);
  out.secondary = optimize_secondary(system.primary, system.secondary, system.shared,
                                     out.primary.policy, lambda, secondary_grid, primary_grid,
                                     options);
  return out;
}

}  // namespace cascade
