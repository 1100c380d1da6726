#include <algorithm>
#include <cmath>

#include "cascade/errors.hpp"
#include "cascade/sim.hpp"
#include "doctest.h"
#include "test_support.hpp"

using namespace cascade;
using cascade::testing::Gen;

namespace {

AppConfig two_stage_app(double prior, double cm, double ca, double d1, double d2,
                        UncertaintyParams u = {}) {
  AppConfig a;
  a.name = "app";
  a.prior = prior;
  a.miss_cost = cm;
  a.fa_cost = ca;
  a.stages.push_back(make_stage(ConditionalPmf({0.7, 0.2, 0.1}, {0.15, 0.25, 0.6}), u, d1, false));
  a.stages.push_back(make_stage(ConditionalPmf({0.8, 0.2}, {0.1, 0.9}), u, d2, true));
  return a;
}

}  // namespace

TEST_CASE("final-stage threshold and peak value") {
  AppConfig a = two_stage_app(0.1, 2.0, 1.0, 0.3, 0.5);
  const auto sol = optimize_primary(a, 0.01, Grid::uniform(301));
  CHECK(sol.policy.tau[2] == 1.0 / 3.0);
  // V_K(pi) = min(C_M pi, C_A (1 - pi)) peaks at 1/3 with value 2/3.
  const double peak = sol.tables.grid.interpolate(sol.tables.value[2], 1.0 / 3.0);
  CHECK(peak == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("single stage value is the Bayes risk plus the first cost") {
  Gen g(31);
  for (int n = 0; n < 20; ++n) {
    AppConfig a;
    a.prior = g.uniform(0.05, 0.95);
    a.miss_cost = g.uniform(0.5, 3.0);
    a.fa_cost = g.uniform(0.5, 3.0);
    const auto m = testing::random_pmf(g, 4);
    a.stages.push_back(make_stage(m, {}, 0.7, true));
    const double lambda = 0.2;
    const auto grids = reachable_grids(make_twin(a));
    const auto sol = optimize_primary(a, lambda, grids.primary);
    double bayes = 0.0;
    for (std::size_t y = 0; y < 4; ++y)
      bayes += std::min(a.miss_cost * a.prior * m.p1(y), a.fa_cost * (1 - a.prior) * m.p0(y));
    CHECK(sol.tables.v0 == doctest::Approx(bayes + lambda * 0.7).epsilon(1e-12));
  }
}

TEST_CASE("very expensive continuation stops at stage one") {
  AppConfig a = two_stage_app(0.3, 2.0, 1.0, 0.1, 5.0, {0.05, 0.05, 0.05, 0.05});
  const double lambda = 10.0;  // lambda D_2 = 50 exceeds C_M
  const auto sol = optimize_primary(a, lambda, Grid::uniform(201));
  CHECK(sol.policy.decision_tau[1] == kInf);
  CHECK(sol.policy.tau[1] == sol.policy.bounds.hi[1]);
  const auto risk = eval_policy_risk(make_twin(a), solve_system(make_twin(a), lambda,
                                                                Grid::uniform(201)));
  CHECK(risk.primary.resource_mJ == doctest::Approx(0.1).epsilon(1e-15));
}

TEST_CASE("DP equals threshold enumeration on exact grids") {
  Gen g(32);
  for (int n = 0; n < 25; ++n) {
    const SystemModel sys = make_twin(testing::random_app(g, 2, 2, n % 2 == 0));
    const auto grids = reachable_grids(sys);
    const double lambda = g.uniform(0.0, 0.5);
    const auto sol = solve_system(sys, lambda, grids.primary, grids.secondary);
    const PrimaryPolicy pol = sol.primary.policy;
    const auto oracle = brute_force_optimum(
        sys, lambda, [&](std::size_t i, double x) { return pol.decide(i, x); });
    CHECK(std::abs(sol.primary.tables.v0 - oracle.primary_risk) <= 1e-9);
    CHECK(std::abs(sol.secondary.tables.v0 - oracle.secondary_risk) <= 1e-9);
  }
}

TEST_CASE("secondary equals explicit enumeration of history policies") {
  Gen g(33);
  for (int n = 0; n < 10; ++n) {
    const SystemModel sys = testing::random_system(g, 2, 2, false);
    const auto grids = reachable_grids(sys);
    const double lambda = g.uniform(0.0, 0.3);
    const auto sol = solve_system(sys, lambda, grids.primary, grids.secondary);
    const PrimaryPolicy pol = sol.primary.policy;
    const double best = enumerate_secondary_policies(
        sys, lambda, [&](std::size_t i, double x) { return pol.decide(i, x); });
    CHECK(std::abs(sol.secondary.tables.v0 - best) <= 1e-9);
  }
}

TEST_CASE("without-branch reduces to the primary recursion on the secondary's models") {
  Gen g(34);
  for (int n = 0; n < 10; ++n) {
    const SystemModel sys = testing::random_system(g, 3, 3, true);
    const Grid grid = Grid::uniform(101);
    const auto sol = solve_system(sys, 0.05, grid);
    const auto alone = optimize_primary(sys.secondary, 0.05, grid);
    for (std::size_t i = 1; i <= 3; ++i)
      for (std::size_t k = 0; k < grid.size(); ++k)
        CHECK(sol.secondary.tables.without[i][k] == alone.tables.value[i][k]);
  }
}

TEST_CASE("twin configuration shares at stage zero and never falls back") {
  AppConfig a = two_stage_app(0.2, 2.0, 1.0, 0.2, 0.4, {0.05, 0.05, 0.05, 0.05});
  const SystemModel sys = make_twin(a);
  const auto sol = solve_system(sys, 0.05, Grid::uniform(201));
  CHECK(sol.secondary.policy.stage0 == Action::Primary);
  const auto& p = sol.secondary.policy;
  for (std::size_t j = 0; j < p.primary_grid.size(); ++j) {
    if (!p.column_available[1][j]) continue;
    for (std::size_t a2 = 0; a2 < p.grid.size(); ++a2)
      CHECK(p.with_action[1][a2 * p.primary_grid.size() + j] != Action::Secondary);
  }
  const auto check = check_sharing_condition(sol.secondary, sys.primary, sys.secondary,
                                             sys.shared, 0.05);
  CHECK(check.all_pass());
  CHECK(check.sufficient_margin[1] == doctest::Approx(0.05 * 0.2).epsilon(1e-9));
}

TEST_CASE("sharing condition fails without a resource price and a better own feature") {
  AppConfig a = two_stage_app(0.3, 2.0, 1.0, 0.2, 0.4);
  SystemModel sys = make_twin(a);
  sys.coupling = Coupling::Independent;
  // The shared primary feature is nearly useless to the secondary.
  sys.shared[0] = make_stage(ConditionalPmf({0.5, 0.3, 0.2}, {0.45, 0.3, 0.25}), {}, 0.0, false);
  sys.shared[1] = make_stage(ConditionalPmf({0.5, 0.5}, {0.45, 0.55}), {}, 0.0, true);
  const auto sol = solve_system(sys, 0.0, Grid::uniform(201));
  const auto check =
      check_sharing_condition(sol.secondary, sys.primary, sys.secondary, sys.shared, 0.0);
  CHECK_FALSE(check.all_pass());
  CHECK(check.sufficient_margin[1] < 0.0);
}

TEST_CASE("value functions are concave, zero at zero and C_M-Lipschitz") {
  Gen g(35);
  for (int n = 0; n < 20; ++n) {
    const SystemModel sys = testing::random_system(g, 3, 4, true);
    const Grid grid = Grid::uniform(81);
    const auto sol = solve_system(sys, g.uniform(0.0, 0.3), grid);
    for (std::size_t i = 0; i <= 3; ++i) {
      const auto s = value_shape(grid, sol.primary.tables.value[i]);
      CHECK(s.finite);
      CHECK(s.max_concavity_violation <= 1e-9);
      CHECK(s.max_slope <= sys.primary.miss_cost + 1e-9);
      if (i > 0) CHECK(s.value_at_zero == 0.0);
    }
  }
}

TEST_CASE("value_shape skips near-duplicate nodes") {
  const Grid g = Grid::from_points({0.0, 0.5, 0.5 + 1e-15, 1.0});
  const std::vector<double> v = {0.0, 0.5, 0.5 + 1e-14, 0.6};
  CHECK(value_shape(g, v).max_slope > 5.0);
  CHECK(value_shape(g, v, 1e-9).max_slope == doctest::Approx(1.0));
}

TEST_CASE("grid refinement converges") {
  AppConfig a = two_stage_app(0.2, 2.0, 1.0, 0.2, 0.4, {0.05, 0.05, 0.05, 0.05});
  const double exact = optimize_primary(a, 0.05, reachable_grids(make_twin(a)).primary).tables.v0;
  double prev = kInf;
  for (std::size_t m : {21, 81, 321, 1281}) {
    const double err = std::abs(optimize_primary(a, 0.05, Grid::uniform(m)).tables.v0 - exact);
    CHECK(err <= prev + 1e-12);
    prev = err;
  }
  CHECK(prev <= 1e-3);
}

TEST_CASE("invalid inputs") {
  AppConfig a = two_stage_app(0.2, 2.0, 1.0, 0.2, 0.4);
  CHECK_THROWS_AS(optimize_primary(a, -1.0, Grid::uniform(11)), ConfigError);
  a.prior = 0.0;
  CHECK_THROWS_AS(optimize_primary(a, 0.1, Grid::uniform(11)), ConfigError);
  AppConfig empty;
  CHECK_THROWS_AS(optimize_primary(empty, 0.1, Grid::uniform(11)), ConfigError);
}
