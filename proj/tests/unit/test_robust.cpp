#include <cmath>

#include "doctest.h"
#include "test_support.hpp"

using namespace cascade;
using cascade::testing::Gen;

TEST_CASE("zero uncertainty is the identity") {
  const ConditionalPmf m({0.7, 0.2, 0.1}, {0.1, 0.2, 0.7});
  const auto b = solve_breakpoints(m, {});
  CHECK(b.lo == doctest::Approx(1.0 / 7.0));
  CHECK(b.hi == doctest::Approx(7.0));
  const auto r = robustify(m, {}, b);
  for (std::size_t y = 0; y < 3; ++y) {
    CHECK(std::abs(r.p0(y) - m.p0(y)) <= 1e-12);
    CHECK(std::abs(r.p1(y) - m.p1(y)) <= 1e-12);
  }
}

TEST_CASE("symmetric binary model has reciprocal breakpoints") {
  for (double e : {0.02, 0.05, 0.1, 0.2}) {
    const ConditionalPmf m({0.8, 0.2}, {0.2, 0.8});
    const auto b = solve_breakpoints(m, {e, e, 0.0, 0.0});
    CHECK(b.lo * b.hi == doctest::Approx(1.0).epsilon(1e-7));
    CHECK(b.lo >= 0.25 - 1e-12);
    CHECK(b.hi <= 4.0 + 1e-12);
  }
}

TEST_CASE("three-bin breakpoints match a residual grid search") {
  const ConditionalPmf m({0.7, 0.2, 0.1}, {0.1, 0.2, 0.7});
  const UncertaintyParams u{0.1, 0.1, 0.1, 0.1};
  const auto b = solve_breakpoints(m, u);
  // Zooming log-grid minimization of the squared residuals.
  double lo = std::log(1.0 / 7.0), hi = std::log(7.0);
  double best_l = 0.0, best_h = 0.0;
  double span_l = hi - lo, span_h = hi - lo, cl = (lo + hi) / 2, ch = (lo + hi) / 2;
  for (int round = 0; round < 30; ++round) {
    double best = kInf;
    for (int i = 0; i <= 40; ++i)
      for (int j = 0; j <= 40; ++j) {
        const double a = cl + span_l * (i / 40.0 - 0.5);
        const double c = ch + span_h * (j / 40.0 - 0.5);
        if (a > c) continue;
        const auto [r0, r1] = normalization_residuals(m, u, std::exp(a), std::exp(c));
        const double v = r0 * r0 + r1 * r1;
        if (v < best) best = v, best_l = a, best_h = c;
      }
    cl = best_l, ch = best_h;
    span_l *= 0.5, span_h *= 0.5;
  }
  CHECK(std::exp(best_l) == doctest::Approx(b.lo).epsilon(1e-6));
  CHECK(std::exp(best_h) == doctest::Approx(b.hi).epsilon(1e-6));
}

TEST_CASE("robustified pmfs are normalized with clipped ratios") {
  Gen g(21);
  int checked = 0;
  for (int n = 0; n < 300; ++n) {
    const auto m = testing::random_pmf(g, g.integer(2, 6));
    const auto u = testing::random_uncertainty(g);
    Breakpoints b;
    try {
      b = solve_breakpoints(m, u);
    } catch (const SolverError&) {
      continue;
    }
    ++checked;
    const auto r = robustify(m, u, b);
    double s0 = 0.0, s1 = 0.0;
    for (std::size_t y = 0; y < r.bins(); ++y) s0 += r.p0(y), s1 += r.p1(y);
    CHECK(std::abs(s0 - 1.0) <= 1e-9);
    CHECK(std::abs(s1 - 1.0) <= 1e-9);
    for (std::size_t y = 0; y < r.bins(); ++y) {
      if (!r.in_support(y)) continue;
      const double l = m.likelihood_ratio(y);
      const double lr = r.likelihood_ratio(y);
      if (l <= b.lo) CHECK(lr == doctest::Approx(b.lo).epsilon(1e-9));
      else if (l >= b.hi) CHECK(lr == doctest::Approx(b.hi).epsilon(1e-9));
      else CHECK(lr == doctest::Approx(l).epsilon(1e-9));
    }
  }
  CHECK(checked > 100);
}

TEST_CASE("overlapping classes with heavy contamination are degenerate") {
  const ConditionalPmf m({0.6, 0.4}, {0.4, 0.6});
  CHECK_THROWS_AS(solve_breakpoints(m, {0.4, 0.4, 0.0, 0.0}), SolverError);
  CHECK_THROWS_AS(solve_breakpoints(m, {1.0, 0.0, 0.0, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(solve_breakpoints(m, {-0.1, 0.0, 0.0, 0.0}), std::invalid_argument);
}

TEST_CASE("posterior bounds") {
  const auto [a, b] = posterior_bounds(Belief(0.5), {1.0 / 3.0, 3.0});
  CHECK(a.value() == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(b.value() == doctest::Approx(0.75).epsilon(1e-15));
  const auto [c, d] = posterior_bounds(Belief(0.2), {2.0, 2.0});
  CHECK(c == d);
  const ConditionalPmf m({0.7, 0.2, 0.1}, {0.1, 0.2, 0.7});
  const auto bp = solve_breakpoints(m, {0.1, 0.1, 0.1, 0.1});
  const auto [e, f] = posterior_bounds(Belief(0.1), bp);
  CHECK(e.value() == posterior_update(Belief(0.1), bp.lo).value());
  CHECK(f.value() == posterior_update(Belief(0.1), bp.hi).value());
}

TEST_CASE("final stage is never robustified") {
  const ConditionalPmf m({0.7, 0.3}, {0.2, 0.8});
  const auto s = make_stage(m, {0.1, 0.1, 0.1, 0.1}, 2.0, true);
  CHECK(s.uncertainty.is_zero());
  CHECK(s.robust == m);
  CHECK(s.cost_mJ == 2.0);
  const auto t = make_stage(m, {0.1, 0.1, 0.1, 0.1}, 2.0, false);
  CHECK_FALSE(t.robust == m);
  CHECK_THROWS_AS(make_stage(m, {}, -1.0, false), std::invalid_argument);
}
