#pragma once

// Random instance generators for property tests.

#include <cmath>
#include <vector>

#include "cascade/errors.hpp"
#include "cascade/rng.hpp"
#include "cascade/system.hpp"

namespace cascade::testing {

class Gen {
 public:
  explicit Gen(std::uint64_t seed, std::uint64_t stream = 0) : rng_(seed, stream) {}
  double uniform(double lo = 0.0, double hi = 1.0) { return lo + (hi - lo) * rng_.uniform(); }
  std::size_t integer(std::size_t lo, std::size_t hi) {
    return lo + static_cast<std::size_t>(rng_.uniform() * static_cast<double>(hi - lo + 1));
  }
  bool coin(double p = 0.5) { return rng_.bernoulli(p); }

 private:
  CounterRng rng_;
};

inline std::vector<double> random_simplex(Gen& g, std::size_t n, double zero_prob = 0.0) {
  std::vector<double> v(n);
  double s = 0.0;
  for (auto& x : v) {
    x = g.coin(zero_prob) ? 0.0 : -std::log(1.0 - g.uniform()) + 1e-3;
    s += x;
  }
  if (s == 0.0) {
    v[0] = 1.0;
    s = 1.0;
  }
  for (auto& x : v) x /= s;
  return v;
}

inline ConditionalPmf random_pmf(Gen& g, std::size_t bins) {
  return ConditionalPmf(random_simplex(g, bins), random_simplex(g, bins));
}

inline UncertaintyParams random_uncertainty(Gen& g, double max_level = 0.15) {
  const double e = g.uniform(0.0, max_level);
  return {e, e, g.uniform(0.0, max_level), g.uniform(0.0, max_level)};
}

/// Random application; stages whose uncertainty is infeasible are redrawn.
inline AppConfig random_app(Gen& g, std::size_t K, std::size_t bins, bool robust,
                            double max_cost = 1.0) {
  AppConfig a;
  a.name = "app";
  a.prior = g.uniform(0.05, 0.6);
  a.miss_cost = g.uniform(0.5, 3.0);
  a.fa_cost = g.uniform(0.5, 3.0);
  for (std::size_t i = 1; i <= K; ++i) {
    for (;;) {
      try {
        const UncertaintyParams u = robust ? random_uncertainty(g) : UncertaintyParams{};
        a.stages.push_back(make_stage(random_pmf(g, bins), u, g.uniform(0.05, max_cost), i == K));
        break;
      } catch (const SolverError&) {
      }
    }
  }
  return a;
}

/// Independent applications; shared models are random over the primary's bins.
inline SystemModel random_system(Gen& g, std::size_t K, std::size_t bins, bool robust,
                                 double max_cost = 1.0) {
  SystemModel s;
  s.primary = random_app(g, K, bins, robust, max_cost);
  s.secondary = random_app(g, K, bins, robust, max_cost);
  s.coupling = Coupling::Independent;
  for (std::size_t i = 1; i <= K; ++i) {
    for (;;) {
      try {
        const UncertaintyParams u = robust ? random_uncertainty(g) : UncertaintyParams{};
        s.shared.push_back(make_stage(random_pmf(g, bins), u, 0.0, i == K));
        break;
      } catch (const SolverError&) {
      }
    }
  }
  return s;
}

}  // namespace cascade::testing
