#pragma once

// Least-favorable (Huber contamination) versions of nominal feature models.

#include <utility>

#include "cascade/models.hpp"

namespace cascade {

struct UncertaintyParams {
  double eps0 = 0.0;
  double eps1 = 0.0;
  double nu0 = 0.0;
  double nu1 = 0.0;

  bool is_zero() const { return eps0 == 0.0 && eps1 == 0.0 && nu0 == 0.0 && nu1 == 0.0; }
  /// Throws std::invalid_argument unless all in [0,1] and eps0, eps1 < 1.
  void validate() const;

  friend bool operator==(const UncertaintyParams&, const UncertaintyParams&) = default;
};

/// Likelihood-ratio clipping interval [lo, hi]; hi may be +inf.
struct Breakpoints {
  double lo = 0.0;
  double hi = kInf;

  friend bool operator==(const Breakpoints&, const Breakpoints&) = default;
};

/// One stage of one application: nominal and least-favorable models plus the
/// per-frame extraction cost.
struct StageModel {
  ConditionalPmf nominal;
  ConditionalPmf robust;
  UncertaintyParams uncertainty;
  Breakpoints breakpoints;
  double cost_mJ = 0.0;
};

/// Breakpoints at which both least-favorable densities normalize to one.
/// Throws SolverError ("degenerate uncertainty") when no such pair exists.
Breakpoints solve_breakpoints(const ConditionalPmf& nominal, const UncertaintyParams& u);

/// Bin-wise least-favorable transform at the given breakpoints.
ConditionalPmf robustify(const ConditionalPmf& nominal, const UncertaintyParams& u,
                         const Breakpoints& b);

/// Normalization residuals (sum q0 - 1, sum q1 - 1) of the transform at (lo, hi).
std::pair<double, double> normalization_residuals(const ConditionalPmf& nominal,
                                                  const UncertaintyParams& u, double lo,
                                                  double hi);

/// Posterior range reachable from pi_prev when the ratio is confined to b.
std::pair<Belief, Belief> posterior_bounds(Belief pi_prev, const Breakpoints& b);

/// Fill in robust/breakpoints. The final stage of an application is never
/// robustified: its uncertainty is reset to zero.
StageModel make_stage(ConditionalPmf nominal, UncertaintyParams u, double cost_mJ,
                      bool final_stage);

}  // namespace cascade
