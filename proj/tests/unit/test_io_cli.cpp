#include <filesystem>
#include <sstream>

#include "cascade/cli.hpp"
#include "cascade/config.hpp"
#include "cascade/errors.hpp"
#include "cascade/io.hpp"
#include "doctest.h"
#include "json.hpp"
#include "test_support.hpp"

using namespace cascade;
namespace fs = std::filesystem;

namespace {

const std::string kTwin = std::string(CASCADE_SOURCE_DIR) + "/configs/gcw_twin.json";

const char* kTiny = R"({
  "name": "tiny",
  "coupling": "independent",
  "grid": 41,
  "lambda": 0.05,
  "primary": {"prior": 0.2, "miss_cost": 2, "fa_cost": 1, "stages": [
    {"nominal": {"p0": [0.7, 0.2, 0.1], "p1": [0.1, 0.3, 0.6]},
     "uncertainty": {"eps0": 0.05, "eps1": 0.05, "nu0": 0.05, "nu1": 0.05}, "cost_mJ": 0.2},
    {"nominal": {"p0": [0.8, 0.2], "p1": [0.2, 0.8]}, "cost_mJ": 0.5}]},
  "secondary": {"prior": 0.3, "miss_cost": 2, "fa_cost": 1, "stages": [
    {"nominal": {"p0": [0.6, 0.3, 0.1], "p1": [0.2, 0.3, 0.5]}, "cost_mJ": 0.3},
    {"nominal": {"p0": [0.9, 0.1], "p1": [0.3, 0.7]}, "cost_mJ": 0.4}]},
  "shared": [
    {"nominal": {"p0": [0.6, 0.2, 0.2], "p1": [0.2, 0.3, 0.5]}},
    {"nominal": {"p0": [0.7, 0.3], "p1": [0.3, 0.7]}}]
})";

int cli(std::vector<std::string> args, std::string* err_text = nullptr) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  if (err_text) *err_text = err.str();
  return code;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("cascade_unit_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("synthetic gaussian pmf") {
  const auto m = gaussian_pmf(100, 2.5);
  double s0 = 0.0, s1 = 0.0;
  for (std::size_t y = 0; y < 100; ++y) s0 += m.p0(y), s1 += m.p1(y);
  CHECK(s0 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(s1 == doctest::Approx(1.0).epsilon(1e-12));
  // Equal-variance shift: the likelihood ratio rises across the bins.
  for (std::size_t y = 1; y < 100; ++y) CHECK(m.likelihood_ratio(y) >= m.likelihood_ratio(y - 1));
  CHECK_THROWS_AS(gaussian_pmf(1, 1.0), ConfigError);
}

TEST_CASE("config parsing and canonical round trip") {
  const SystemConfig c = parse_config(kTiny);
  CHECK(c.name == "tiny");
  CHECK(c.system.coupling == Coupling::Independent);
  CHECK(c.grid == 41);
  CHECK(*c.lambda == 0.05);
  CHECK(c.system.primary.stage(1).cost_mJ == 0.2);
  CHECK(c.system.primary.stage(2).uncertainty.is_zero());
  const SystemConfig again = parse_config(config_to_json(c));
  CHECK(again.system.primary.stage(1).nominal == c.system.primary.stage(1).nominal);
  CHECK(again.system.primary.stage(1).robust == c.system.primary.stage(1).robust);
  CHECK(again.system.secondary.stage(2).nominal == c.system.secondary.stage(2).nominal);
  CHECK(again.system.shared[0].nominal == c.system.shared[0].nominal);
  CHECK(again.system.secondary.prior == 0.3);
  CHECK(config_to_json(again) == config_to_json(c));
}

TEST_CASE("bundled twin configs encode the experiment constants") {
  const SystemConfig c = load_config(kTwin);
  CHECK(c.system.coupling == Coupling::Twin);
  CHECK(*c.lambda == 0.0043);
  CHECK(c.system.primary.final_threshold() == 1.0 / 3.0);
  CHECK(c.system.primary.stage(1).cost_mJ == doctest::Approx(1.3824).epsilon(1e-14));
  CHECK(c.system.primary.stage(3).cost_mJ == doctest::Approx(71.16).epsilon(1e-14));
  CHECK(c.system.primary.stage(1).nominal.bins() == 100);
  const SystemConfig b =
      load_config(std::string(CASCADE_SOURCE_DIR) + "/configs/gcw_twin_budget.json");
  REQUIRE(b.budget.has_value());
  CHECK(b.budget->budget_mJ == 49.398);
  CHECK(b.budget->baseline_mJ == doctest::Approx((0.72 + 1.08 + 1.8) * 32 / 1000).epsilon(1e-14));
}

TEST_CASE("config errors") {
  auto j = nlohmann::json::parse(kTiny);
  j["budget"] = {{"budget_mJ", 3.0}};
  CHECK_THROWS_AS(parse_config(j.dump()), ConfigError);
  j = nlohmann::json::parse(kTiny);
  j.erase("lambda");
  CHECK_THROWS_AS(parse_config(j.dump()), ConfigError);
  j = nlohmann::json::parse(kTiny);
  j["primary"]["stages"][0]["nominal"]["p0"] = {0.5, 0.6, 0.1};
  CHECK_THROWS_AS(parse_config(j.dump()), ConfigError);
  j = nlohmann::json::parse(kTiny);
  j.erase("shared");
  CHECK_THROWS_AS(parse_config(j.dump()), ConfigError);
  CHECK_THROWS_AS(parse_config("{not json"), ConfigError);
}

TEST_CASE("policy and value tables round trip") {
  const SystemConfig c = parse_config(kTiny);
  const auto sol = solve_system(c.system, *c.lambda, Grid::uniform(c.grid), c.options);
  const auto p = policy_from_json(policy_to_json(c.system, sol));
  CHECK(p.lambda == 0.05);
  REQUIRE(p.primary_tau.size() == sol.primary.policy.tau.size());
  for (std::size_t i = 1; i < p.primary_tau.size(); ++i) {
    CHECK(p.primary_tau[i] == sol.primary.policy.tau[i]);
    CHECK(p.primary_decision_tau[i] == sol.primary.policy.decision_tau[i]);
    CHECK(p.secondary_tau[i] == sol.secondary.policy.tau[i]);
  }
  CHECK(p.secondary_stage0 == to_string(sol.secondary.policy.stage0));

  const auto rows = parse_values_csv(values_csv(sol, 1));
  REQUIRE(rows.size() == 2 * 41);
  for (std::size_t k = 0; k < 41; ++k) {
    CHECK(rows[k].app == "primary");
    CHECK(rows[k].belief == sol.primary.tables.grid[k]);
    CHECK(rows[k].value == sol.primary.tables.value[1][k]);
    CHECK(rows[41 + k].value == sol.secondary.tables.without[1][k]);
  }
}

TEST_CASE("number formatting survives a round trip") {
  for (double x : {0.1, 1.0 / 3.0, 1e-300, 12345.678901234567, 0.0043})
    CHECK(std::stod(format_double(x)) == x);
}

TEST_CASE("scores csv") {
  const auto s = parse_scores_csv("score,label\n0.5,1\n-1.25,0\n");
  REQUIRE(s.size() == 2);
  CHECK(s[0].score == 0.5);
  CHECK(s[1].label == 0);
  CHECK_THROWS_AS(parse_scores_csv("score,label\n0.5,7\n"), ConfigError);
  CHECK_THROWS_AS(parse_scores_csv("score,label\nabc,1\n"), ConfigError);
}

TEST_CASE("cli exit codes") {
  std::string err;
  CHECK(cli({"optimize"}, &err) == 2);
  CHECK(cli({"optimize", "--config", "/nonexistent.json"}, &err) == 2);
  CHECK(nlohmann::json::parse(err).contains("error"));
  CHECK(cli({"optimize", "--config", kTwin, "--lambda", "0.1", "--budget-mJ", "40"}, &err) == 2);
  CHECK(cli({"bogus"}, &err) == 2);

  const fs::path dir = scratch("budget");
  const std::string cfg = (dir / "tiny.json").string();
  auto j = nlohmann::json::parse(kTiny);
  j.erase("lambda");
  j["budget"] = {{"budget_mJ", 0.05}};  // below the unconditional first-stage cost
  write_text(cfg, j.dump());
  CHECK(cli({"optimize", "--config", cfg, "--out-dir", dir.string()}, &err) == 5);
  CHECK(nlohmann::json::parse(err)["error"] == "bracket");
}

TEST_CASE("cli optimize, simulate and estimate write their artifacts") {
  const fs::path dir = scratch("run");
  const std::string cfg = (dir / "tiny.json").string();
  write_text(cfg, kTiny);
  CHECK(cli({"optimize", "--config", cfg, "--out-dir", dir.string()}) == 0);
  CHECK(fs::exists(dir / "policy.json"));
  CHECK(fs::exists(dir / "budget.json"));
  CHECK(fs::exists(dir / "values_stage_1.csv"));
  CHECK(fs::exists(dir / "secondary_with_stage_1.csv"));

  CHECK(cli({"simulate", "--config", cfg, "--out-dir", dir.string(), "--trials", "2000",
             "--seed", "4", "--dump-trials", "50"}) == 0);
  const auto rep = nlohmann::json::parse(read_text((dir / "report.json").string()));
  CHECK(rep["trials"] == 2000);
  CHECK(fs::exists(dir / "trials.csv"));

  write_text((dir / "scores.csv").string(), "score,label\n0.1,0\n0.2,0\n0.9,1\n0.8,1\n");
  CHECK(cli({"estimate", "--scores", (dir / "scores.csv").string(), "--bins", "4", "--out-dir",
             dir.string()}) == 0);
  const auto pmf = nlohmann::json::parse(read_text((dir / "scores.pmf.json").string()));
  CHECK(pmf["bins"] == 4);
}
