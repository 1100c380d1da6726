#include "cascade/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "cascade/errors.hpp"
#include "json_util.hpp"

namespace cascade {

using nlohmann::json;

namespace {

double phi(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

std::vector<CostTerm> parse_terms(const json& j) {
  std::vector<CostTerm> out;
  for (const auto& t : j) out.push_back({t.at("power_mW").get<double>(), t.at("time_ms").get<double>()});
  return out;
}

ConditionalPmf parse_nominal(const json& s) {
  if (s.contains("nominal")) {
    const json& n = s.at("nominal");
    auto p0 = n.at("p0").get<std::vector<double>>();
    auto p1 = n.at("p1").get<std::vector<double>>();
    if (n.contains("bins") && n.at("bins").get<std::size_t>() != p0.size())
      throw ConfigError("nominal.bins does not match the length of p0");
    return ConditionalPmf(std::move(p0), std::move(p1));
  }
  if (s.contains("synthetic")) {
    const json& g = s.at("synthetic");
    return gaussian_pmf(g.at("bins").get<std::size_t>(), g.at("d_prime").get<double>());
  }
  throw ConfigError("stage needs either a nominal model or a synthetic generator");
}

UncertaintyParams parse_uncertainty(const json& s) {
  UncertaintyParams u;
  if (!s.contains("uncertainty")) return u;
  const json& j = s.at("uncertainty");
  u.eps0 = get_or(j, "eps0", 0.0);
  u.eps1 = get_or(j, "eps1", 0.0);
  u.nu0 = get_or(j, "nu0", 0.0);
  u.nu1 = get_or(j, "nu1", 0.0);
  return u;
}

double parse_cost(const json& s) {
  if (s.contains("cost_mJ")) return s.at("cost_mJ").get<double>();
  if (s.contains("cost_terms")) return energy_mJ(parse_terms(s.at("cost_terms")));
  return 0.0;
}

std::vector<StageModel> parse_stages(const json& arr, bool need_cost) {
  if (!arr.is_array() || arr.empty()) throw ConfigError("stages must be a nonempty array");
  std::vector<StageModel> out;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const json& s = arr[i];
    if (need_cost && !s.contains("cost_mJ") && !s.contains("cost_terms"))
      throw ConfigError("stage " + std::to_string(i + 1) + " has no cost_mJ or cost_terms");
    try {
      out.push_back(make_stage(parse_nominal(s), parse_uncertainty(s), parse_cost(s),
                               i + 1 == arr.size()));
    } catch (const std::invalid_argument& e) {
      throw ConfigError("stage " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  return out;
}

AppConfig parse_app(const json& j, const std::string& fallback_name) {
  AppConfig a;
  a.name = get_or<std::string>(j, "name", fallback_name);
  a.prior = j.at("prior").get<double>();
  a.miss_cost = j.at("miss_cost").get<double>();
  a.fa_cost = j.at("fa_cost").get<double>();
  a.stages = parse_stages(j.at("stages"), true);
  return a;
}

json pmf_json(const ConditionalPmf& m) {
  return {{"bins", m.bins()},
          {"p0", std::vector<double>(m.p0().begin(), m.p0().end())},
          {"p1", std::vector<double>(m.p1().begin(), m.p1().end())}};
}

json stage_json(const StageModel& s, bool with_cost) {
  const auto& u = s.uncertainty;
  json j = {{"nominal", pmf_json(s.nominal)},
            {"uncertainty", {{"eps0", u.eps0}, {"eps1", u.eps1}, {"nu0", u.nu0}, {"nu1", u.nu1}}},
            {"robust", pmf_json(s.robust)},
            {"breakpoints",
             {{"lo", jsonutil::number(s.breakpoints.lo)},
              {"hi", jsonutil::number(s.breakpoints.hi)}}}};
  if (with_cost) j["cost_mJ"] = s.cost_mJ;
  return j;
}

json app_json(const AppConfig& a) {
  json stages = json::array();
  for (const auto& s : a.stages) stages.push_back(stage_json(s, true));
  return {{"name", a.name},
          {"prior", a.prior},
          {"miss_cost", a.miss_cost},
          {"fa_cost", a.fa_cost},
          {"stages", stages}};
}

}  // namespace

ConditionalPmf gaussian_pmf(std::size_t bins, double d_prime) {
  if (bins < 2) throw ConfigError("synthetic model needs at least 2 bins");
  if (!std::isfinite(d_prime)) throw ConfigError("d_prime must be finite");
  const double lo = std::min(0.0, d_prime) - 4.0;
  const double hi = std::max(0.0, d_prime) + 4.0;
  const double width = (hi - lo) / static_cast<double>(bins);
  std::vector<double> p0(bins), p1(bins);
  for (std::size_t k = 0; k < bins; ++k) {
    const double a = k == 0 ? -HUGE_VAL : lo + width * static_cast<double>(k);
    const double b = k + 1 == bins ? HUGE_VAL : lo + width * static_cast<double>(k + 1);
    p0[k] = phi(b) - phi(a);
    p1[k] = phi(b - d_prime) - phi(a - d_prime);
  }
  double s0 = 0.0, s1 = 0.0;
  for (std::size_t k = 0; k < bins; ++k) {
    s0 += p0[k];
    s1 += p1[k];
  }
  for (std::size_t k = 0; k < bins; ++k) {
    p0[k] /= s0;
    p1[k] /= s1;
  }
  return ConditionalPmf(std::move(p0), std::move(p1));
}

void SystemConfig::validate() const {
  if (lambda.has_value() == budget.has_value())
    throw ConfigError("exactly one of lambda and budget must be given");
  if (lambda && (!(*lambda >= 0.0) || !std::isfinite(*lambda)))
    throw ConfigError("lambda must be finite and nonnegative");
  if (budget) budget->validate();
  if (grid < 2) throw ConfigError("grid must have at least 2 points");
  if (trials < 1) throw ConfigError("trials must be at least 1");
  for (double p : sweep_priors)
    if (!(p > 0.0 && p < 1.0)) throw ConfigError("sweep priors must lie in (0, 1)");
  system.validate();
}

SystemConfig parse_config(const std::string& json_text) {
  SystemConfig c;
  try {
    const json j = json::parse(json_text);
    c.name = get_or<std::string>(j, "name", "system");
    c.grid = get_or<std::size_t>(j, "grid", 100);
    c.seed = get_or<std::uint64_t>(j, "seed", 1);
    c.trials = get_or<std::uint64_t>(j, "trials", 100000);
    if (j.contains("lambda")) c.lambda = j.at("lambda").get<double>();
    if (j.contains("budget")) {
      const json& b = j.at("budget");
      BudgetSpec s;
      s.budget_mJ = b.at("budget_mJ").get<double>();
      if (b.contains("baseline_mJ")) s.baseline_mJ = b.at("baseline_mJ").get<double>();
      else if (b.contains("baseline_terms")) s.baseline_mJ = energy_mJ(parse_terms(b.at("baseline_terms")));
      if (b.contains("lambda_bracket")) {
        const auto br = b.at("lambda_bracket").get<std::vector<double>>();
        if (br.size() != 2) throw ConfigError("lambda_bracket must have two entries");
        s.lambda_lo = br[0];
        s.lambda_hi = br[1];
      }
      s.tolerance = get_or(b, "tolerance", s.tolerance);
      s.max_iterations = get_or(b, "max_iterations", s.max_iterations);
      c.budget = s;
    }
    if (j.contains("options")) {
      const json& o = j.at("options");
      c.options.allow_sharing = get_or(o, "allow_sharing", true);
      c.options.allow_early_positive = get_or(o, "allow_early_positive", false);
    }
    c.sweep_priors = get_or<std::vector<double>>(j, "sweep_priors", {});

    const std::string coupling = get_or<std::string>(j, "coupling", "twin");
    if (coupling != "twin" && coupling != "independent")
      throw ConfigError("coupling must be \"twin\" or \"independent\"");
    SystemModel& s = c.system;
    s.coupling = coupling == "twin" ? Coupling::Twin : Coupling::Independent;
    s.primary = parse_app(j.at("primary"), "primary");
    if (j.contains("secondary")) {
      s.secondary = parse_app(j.at("secondary"), "secondary");
    } else if (s.coupling == Coupling::Twin) {
      s.secondary = s.primary;
      s.secondary.name = "secondary";
    } else {
      throw ConfigError("independent coupling requires a secondary application");
    }
    if (j.contains("shared")) s.shared = parse_stages(j.at("shared"), false);
    else if (s.coupling == Coupling::Twin) s.shared = s.primary.stages;
    else throw ConfigError("independent coupling requires shared-feature models");
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  c.validate();
  return c;
}

SystemConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string config_to_json(const SystemConfig& c) {
  json j;
  j["name"] = c.name;
  j["coupling"] = to_string(c.system.coupling);
  j["grid"] = c.grid;
  if (c.lambda) j["lambda"] = *c.lambda;
  if (c.budget) {
    const BudgetSpec& b = *c.budget;
    j["budget"] = {{"budget_mJ", b.budget_mJ},
                   {"baseline_mJ", b.baseline_mJ},
                   {"lambda_bracket", {b.lambda_lo, b.lambda_hi}},
                   {"tolerance", b.tolerance},
                   {"max_iterations", b.max_iterations}};
  }
  j["options"] = {{"allow_sharing", c.options.allow_sharing},
                  {"allow_early_positive", c.options.allow_early_positive}};
  j["seed"] = c.seed;
  j["trials"] = c.trials;
  j["sweep_priors"] = c.sweep_priors;
  j["primary"] = app_json(c.system.primary);
  j["secondary"] = app_json(c.system.secondary);
  json shared = json::array();
  for (const auto& s : c.system.shared) shared.push_back(stage_json(s, false));
  j["shared"] = shared;
  return j.dump(2) + "\n";
}

}  // namespace cascade
