#include "cascade/io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "cascade/errors.hpp"
#include "json_util.hpp"

namespace cascade {

using nlohmann::json;
using jsonutil::number;
using jsonutil::numbers;

namespace {

json estimate_json(const Estimate& e) { return {{"mean", number(e.mean)}, {"stderr", number(e.stderr_)}}; }

json stats_json(const AppStats& s) {
  return {{"miss", estimate_json(s.miss)},
          {"false_alarm", estimate_json(s.false_alarm)},
          {"resource_mJ", estimate_json(s.resource_mJ)},
          {"risk", estimate_json(s.risk)}};
}

json breakdown_json(const RiskBreakdown& r) {
  return {{"miss", number(r.miss)},
          {"false_alarm", number(r.false_alarm)},
          {"weighted_resource", number(r.weighted_resource)},
          {"total", number(r.total)},
          {"resource_mJ", number(r.resource_mJ)},
          {"continue_prob", numbers(r.continue_prob)}};
}

json bounds_json(const BeliefBounds& b) { return {{"lo", numbers(b.lo)}, {"hi", numbers(b.hi)}}; }

std::vector<double> doubles(const json& a) {
  std::vector<double> out;
  for (const auto& x : a) out.push_back(jsonutil::to_double(x));
  return out;
}

std::string actions_string(const std::vector<Action>& acts) {
  std::string s;
  for (std::size_t i = 0; i < acts.size(); ++i) {
    if (i) s += ';';
    s += to_string(acts[i]);
  }
  return s;
}

}  // namespace

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string policy_to_json(const SystemModel& system, const SystemSolution& s) {
  const PrimaryPolicy& p = s.primary.policy;
  const SecondaryPolicy& q = s.secondary.policy;
  json eta = json::array(), deta = json::array();
  for (std::size_t i = 0; i < q.eta.size(); ++i) {
    eta.push_back(numbers(q.eta[i]));
    deta.push_back(numbers(q.decision_eta[i]));
  }
  json j = {
      {"lambda", number(s.lambda)},
      {"coupling", to_string(system.coupling)},
      {"primary",
       {{"name", system.primary.name},
        {"prior", system.primary.prior},
        {"grid_size", s.primary.tables.grid.size()},
        {"tau", numbers(p.tau)},
        {"decision_tau", numbers(p.decision_tau)},
        {"positive_tau", numbers(p.positive_tau)},
        {"bounds", bounds_json(p.bounds)},
        {"v0", number(s.primary.tables.v0)}}},
      {"secondary",
       {{"name", system.secondary.name},
        {"prior", system.secondary.prior},
        {"grid_size", s.secondary.tables.grid.size()},
        {"stage0", to_string(q.stage0)},
        {"tau", numbers(q.tau)},
        {"decision_tau", numbers(q.decision_tau)},
        {"positive_tau", numbers(q.positive_tau)},
        {"eta", eta},
        {"decision_eta", deta},
        {"primary_grid", numbers(s.secondary.tables.primary_grid.points())},
        {"bounds", bounds_json(q.bounds)},
        {"v0", number(s.secondary.tables.v0)},
        {"v0_shared", number(s.secondary.tables.v0_shared)},
        {"v0_own", number(s.secondary.tables.v0_own)}}}};
  return j.dump(2) + "\n";
}

PolicyThresholds policy_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    PolicyThresholds t;
    t.lambda = jsonutil::to_double(j.at("lambda"));
    t.primary_tau = doubles(j.at("primary").at("tau"));
    t.primary_decision_tau = doubles(j.at("primary").at("decision_tau"));
    t.secondary_tau = doubles(j.at("secondary").at("tau"));
    t.secondary_decision_tau = doubles(j.at("secondary").at("decision_tau"));
    t.secondary_stage0 = j.at("secondary").at("stage0").get<std::string>();
    return t;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid policy document: ") + e.what());
  }
}

std::string values_csv(const SystemSolution& s, std::size_t stage) {
  std::string out = "app,belief,value\n";
  const Grid& g1 = s.primary.tables.grid;
  const auto& v1 = s.primary.tables.value.at(stage);
  for (std::size_t k = 0; k < g1.size(); ++k)
    out += "primary," + format_double(g1[k]) + "," + format_double(v1[k]) + "\n";
  const Grid& g2 = s.secondary.tables.grid;
  const auto& v2 = s.secondary.tables.without.at(stage);
  for (std::size_t k = 0; k < g2.size(); ++k)
    out += "secondary," + format_double(g2[k]) + "," + format_double(v2[k]) + "\n";
  return out;
}

std::string secondary_with_csv(const SystemSolution& s, std::size_t stage) {
  std::string out = "belief2,belief1,value\n";
  const auto& t = s.secondary.tables;
  const Matrix& m = t.with.at(stage);
  for (std::size_t a = 0; a < m.rows; ++a)
    for (std::size_t j = 0; j < m.cols; ++j)
      out += format_double(t.grid[a]) + "," + format_double(t.primary_grid[j]) + "," +
             format_double(m(a, j)) + "\n";
  return out;
}

std::vector<ValueRow> parse_values_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  if (line != "app,belief,value") throw ConfigError("values CSV has an unexpected header");
  std::vector<ValueRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos)
      throw ConfigError("malformed values CSV row: " + line);
    rows.push_back({line.substr(0, c1), std::strtod(line.c_str() + c1 + 1, nullptr),
                    std::strtod(line.c_str() + c2 + 1, nullptr)});
  }
  return rows;
}

std::string budget_to_json(const ResourceUsage& u, double lambda, bool slack,
                           const LambdaResult* solve) {
  json j = {{"lambda", number(lambda)},
            {"E1_mJ", number(u.primary_mJ)},
            {"E2_mJ", number(u.secondary_mJ)},
            {"baseline_mJ", number(u.baseline_mJ)},
            {"total_mJ", number(u.total_mJ)},
            {"slack", slack}};
  if (solve) {
    j["within_tolerance"] = solve->within_tolerance;
    j["iterations"] = solve->iterations;
  }
  return j.dump(2) + "\n";
}

std::string sim_report_to_json(const SimResult& sim, const SystemModel& system,
                               const SystemSolution& solution) {
  const SystemRisk exact = eval_policy_risk(system, solution, Measure::Nominal);
  json j = {{"trials", sim.trials},
            {"seed", sim.seed},
            {"lambda", number(sim.lambda)},
            {"primary", stats_json(sim.primary)},
            {"secondary", stats_json(sim.secondary)},
            {"energy_mJ", estimate_json(sim.energy_mJ)},
            {"dp",
             {{"primary_v0", number(solution.primary.tables.v0)},
              {"secondary_v0", number(solution.secondary.tables.v0)},
              {"primary_nominal", breakdown_json(exact.primary)},
              {"secondary_nominal", breakdown_json(exact.secondary)}}}};
  return j.dump(2) + "\n";
}

std::string twin_report_to_json(const TwinReport& r) {
  json rows = json::array();
  for (const auto& x : r.rows) {
    rows.push_back({{"prior", x.prior},
                    {"E1", number(x.E1)},
                    {"E2", number(x.E2)},
                    {"saving", std::isfinite(x.saving) ? json(x.saving) : json(nullptr)},
                    {"miss1", number(x.miss1)},
                    {"fa1", number(x.fa1)},
                    {"risk1", number(x.risk1)},
                    {"detect2_shared", number(x.detect2_shared)},
                    {"risk2_shared", number(x.risk2_shared)},
                    {"detect2_ablated", number(x.detect2_ablated)},
                    {"risk2_ablated", number(x.risk2_ablated)},
                    {"E2_ablated", number(x.E2_ablated)}});
  }
  json j = {{"lambda", number(r.lambda)}, {"grid", r.grid_size}, {"rows", rows}};
  return j.dump(2) + "\n";
}

std::string twin_report_to_csv(const TwinReport& r) {
  std::string out =
      "prior,E1,E2,saving,miss1,fa1,risk1,detect2_shared,risk2_shared,detect2_ablated,"
      "risk2_ablated,E2_ablated\n";
  for (const auto& x : r.rows) {
    const double v[] = {x.prior,          x.E1,          x.E2,
                        x.saving,         x.miss1,       x.fa1,
                        x.risk1,          x.detect2_shared, x.risk2_shared,
                        x.detect2_ablated, x.risk2_ablated, x.E2_ablated};
    for (std::size_t k = 0; k < std::size(v); ++k) out += (k ? "," : "") + format_double(v[k]);
    out += "\n";
  }
  return out;
}

std::string trials_csv_header() {
  return "trial,x1,x2,actions1,actions2,xhat1,xhat2,stop1,stop2,energy1_mJ,energy2_mJ\n";
}

std::string trial_csv_row(const TrialOutcome& t) {
  return std::to_string(t.trial) + "," + std::to_string(t.x1) + "," + std::to_string(t.x2) +
         "," + actions_string(t.actions1) + "," + actions_string(t.actions2) + "," +
         std::to_string(t.xhat1) + "," + std::to_string(t.xhat2) + "," +
         std::to_string(t.stop1) + "," + std::to_string(t.stop2) + "," +
         format_double(t.energy1_mJ) + "," + format_double(t.energy2_mJ) + "\n";
}

std::string checks_to_json(const SharingCheck& sharing, const CascadeOptimalityCheck& primary,
                           const CascadeOptimalityCheck& secondary) {
  auto flags = [](const std::vector<bool>& v) {
    json a = json::array();
    for (bool b : v) a.push_back(b);
    return a;
  };
  auto cascade = [&](const CascadeOptimalityCheck& c) {
    return json{{"all_pass", c.all_pass()},
                {"pass", flags(c.pass)},
                {"positive_threshold", numbers(c.positive_threshold)},
                {"upper_bound", numbers(c.upper_bound)}};
  };
  json j = {{"sharing",
             {{"all_pass", sharing.all_pass()},
              {"pass", flags(sharing.pass)},
              {"margin", numbers(sharing.margin)},
              {"sufficient_margin", numbers(sharing.sufficient_margin)}}},
            {"cascade_optimality", {{"primary", cascade(primary)}, {"secondary", cascade(secondary)}}}};
  return j.dump(2) + "\n";
}

std::string pmf_to_json(const EstimatedPmf& e) {
  json j = {{"bins", e.pmf.bins()},
            {"edges", e.edges},
            {"p0", std::vector<double>(e.pmf.p0().begin(), e.pmf.p0().end())},
            {"p1", std::vector<double>(e.pmf.p1().begin(), e.pmf.p1().end())}};
  return j.dump(2) + "\n";
}

std::vector<LabeledScore> parse_scores_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("score CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "score,label") throw ConfigError("score CSV must start with header score,label");
  std::vector<LabeledScore> out;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    char* end = nullptr;
    const double score = std::strtod(line.c_str(), &end);
    if (comma == std::string::npos || end != line.c_str() + comma || !std::isfinite(score))
      throw ConfigError("score CSV row " + std::to_string(row) + " is malformed");
    const std::string label = line.substr(comma + 1);
    if (label != "0" && label != "1")
      throw ConfigError("score CSV row " + std::to_string(row) + " has a label outside {0,1}");
    out.push_back({score, label == "1" ? 1 : 0});
  }
  return out;
}

std::vector<LabeledScore> read_scores_csv(const std::string& path) {
  return parse_scores_csv(read_text(path));
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path);
  out << content;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace cascade
