#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

#include "cascade/budget.hpp"
#include "cascade/config.hpp"
#include "cascade/errors.hpp"
#include "cascade/io.hpp"
#include "cascade/sim.hpp"

namespace py = pybind11;
using namespace cascade;

namespace {

std::vector<double> to_vector(std::span<const double> s) { return {s.begin(), s.end()}; }

// A solved configuration: the lambda actually used and, for budgets, the solve record.
struct Solved {
  SystemConfig config;
  Grid grid;
  SystemSolution solution;
  std::optional<LambdaResult> budget;
};

Solved solve(const SystemConfig& cfg, std::optional<double> lambda, std::optional<std::size_t> grid) {
  Solved s;
  s.config = cfg;
  if (grid) s.config.grid = *grid;
  if (lambda) {
    s.config.lambda = *lambda;
    s.config.budget.reset();
  }
  s.config.validate();
  s.grid = Grid::uniform(s.config.grid);
  if (s.config.lambda) {
    s.solution = solve_system(s.config.system, *s.config.lambda, s.grid, s.grid, s.config.options);
  } else {
    s.budget = solve_lambda(*s.config.budget, s.config.system, s.grid, s.grid, s.config.options);
    s.solution = s.budget->solution;
  }
  return s;
}

py::dict breakdown(const RiskBreakdown& r) {
  py::dict d;
  d["miss"] = r.miss;
  d["false_alarm"] = r.false_alarm;
  d["resource_mJ"] = r.resource_mJ;
  d["weighted_resource"] = r.weighted_resource;
  d["total"] = r.total;
  d["continue_prob"] = r.continue_prob;
  return d;
}

py::object loads(const std::string& text) { return py::module_::import("json").attr("loads")(text); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Robust two-application sensing cascades with shared features";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);
  py::register_exception<EnumerationCapError>(m, "EnumerationCapError", PyExc_RuntimeError);
  py::register_exception<BracketError>(m, "BracketError", PyExc_RuntimeError);

  m.def("posterior_update",
        [](double pi, double ratio) { return posterior_update(Belief(pi), ratio).value(); },
        py::arg("pi"), py::arg("ratio"));
  m.def("evidence_pmf",
        [](std::vector<double> p0, std::vector<double> p1, double pi) {
          return evidence_pmf(ConditionalPmf(std::move(p0), std::move(p1)), Belief(pi));
        },
        py::arg("p0"), py::arg("p1"), py::arg("pi"));
  m.def("solve_breakpoints",
        [](std::vector<double> p0, std::vector<double> p1, double eps0, double eps1, double nu0,
           double nu1) {
          const Breakpoints b = solve_breakpoints(ConditionalPmf(std::move(p0), std::move(p1)),
                                                  {eps0, eps1, nu0, nu1});
          return py::make_tuple(b.lo, b.hi);
        },
        py::arg("p0"), py::arg("p1"), py::arg("eps0"), py::arg("eps1"), py::arg("nu0"),
        py::arg("nu1"));
  m.def("robustify",
        [](std::vector<double> p0, std::vector<double> p1, double eps0, double eps1, double nu0,
           double nu1) {
          const ConditionalPmf nominal(std::move(p0), std::move(p1));
          const UncertaintyParams u{eps0, eps1, nu0, nu1};
          const ConditionalPmf r = robustify(nominal, u, solve_breakpoints(nominal, u));
          return py::make_tuple(to_vector(r.p0()), to_vector(r.p1()));
        },
        py::arg("p0"), py::arg("p1"), py::arg("eps0"), py::arg("eps1"), py::arg("nu0"),
        py::arg("nu1"));
  m.def("estimate_pmf",
        [](const std::vector<double>& scores, const std::vector<int>& labels, std::size_t bins) {
          if (scores.size() != labels.size())
            throw ConfigError("scores and labels must have the same length");
          std::vector<LabeledScore> s;
          for (std::size_t i = 0; i < scores.size(); ++i) s.push_back({scores[i], labels[i]});
          return loads(pmf_to_json(estimate_pmf(s, bins)));
        },
        py::arg("scores"), py::arg("labels"), py::arg("bins"));
  m.def("roc_pr",
        [](std::vector<double> p0, std::vector<double> p1, double prior) {
          py::list out;
          for (const auto& op : roc_pr(ConditionalPmf(std::move(p0), std::move(p1)), Belief(prior))) {
            py::dict d;
            d["threshold_bin"] = op.threshold_bin;
            d["tpr"] = op.tpr;
            d["fpr"] = op.fpr;
            d["precision"] = op.precision ? py::cast(*op.precision) : py::none();
            d["recall"] = op.recall;
            out.append(d);
          }
          return out;
        },
        py::arg("p0"), py::arg("p1"), py::arg("prior"));

  py::class_<SystemConfig>(m, "Config")
      .def_static("load", &load_config, py::arg("path"))
      .def_static("parse", &parse_config, py::arg("text"))
      .def_readonly("name", &SystemConfig::name)
      .def_readonly("grid", &SystemConfig::grid)
      .def_readonly("lambda_", &SystemConfig::lambda)
      .def_readonly("seed", &SystemConfig::seed)
      .def_readonly("trials", &SystemConfig::trials)
      .def_readonly("sweep_priors", &SystemConfig::sweep_priors)
      .def_property_readonly("stage_count", [](const SystemConfig& c) { return c.system.stage_count(); })
      .def_property_readonly("has_budget", [](const SystemConfig& c) { return c.budget.has_value(); })
      .def("to_json", [](const SystemConfig& c) { return config_to_json(c); });

  py::class_<Solved>(m, "Solution")
      .def_property_readonly("lambda_", [](const Solved& s) { return s.solution.lambda; })
      .def_property_readonly("primary_v0", [](const Solved& s) { return s.solution.primary.tables.v0; })
      .def_property_readonly("secondary_v0",
                             [](const Solved& s) { return s.solution.secondary.tables.v0; })
      .def_property_readonly("primary_tau", [](const Solved& s) { return s.solution.primary.policy.tau; })
      .def_property_readonly("secondary_tau",
                             [](const Solved& s) { return s.solution.secondary.policy.tau; })
      .def_property_readonly("secondary_stage0", [](const Solved& s) {
        return std::string(to_string(s.solution.secondary.policy.stage0));
      })
      .def_property_readonly("grid", [](const Solved& s) { return to_vector(s.grid.points()); })
      .def("primary_values",
           [](const Solved& s, std::size_t stage) {
             return s.solution.primary.tables.value.at(stage);
           },
           py::arg("stage"))
      .def("policy", [](const Solved& s) { return loads(policy_to_json(s.config.system, s.solution)); })
      .def("budget", [](const Solved& s) {
        const double base = s.config.budget ? s.config.budget->baseline_mJ : 0.0;
        const ResourceUsage u = expected_resource(s.config.system, s.solution, base);
        return loads(budget_to_json(u, s.solution.lambda, s.budget && s.budget->slack,
                                    s.budget ? &*s.budget : nullptr));
      })
      .def("risk",
           [](const Solved& s, const std::string& measure) {
             if (measure != "robust" && measure != "nominal")
               throw ConfigError("measure must be \"robust\" or \"nominal\"");
             const SystemRisk r = eval_policy_risk(
                 s.config.system, s.solution, measure == "robust" ? Measure::Robust : Measure::Nominal);
             py::dict d;
             d["primary"] = breakdown(r.primary);
             d["secondary"] = breakdown(r.secondary);
             return d;
           },
           py::arg("measure") = "robust")
      .def("checks", [](const Solved& s) {
        const auto& sys = s.config.system;
        return loads(checks_to_json(
            check_sharing_condition(s.solution.secondary, sys.primary, sys.secondary, sys.shared,
                                    s.solution.lambda),
            check_cascade_optimality(s.solution.primary, sys.primary),
            check_cascade_optimality(s.solution.secondary, sys.secondary)));
      })
      .def("simulate",
           [](const Solved& s, std::optional<std::uint64_t> trials, std::optional<std::uint64_t> seed,
              unsigned threads) {
             SimOptions o{trials.value_or(s.config.trials), seed.value_or(s.config.seed), threads};
             SimResult r;
             {
               py::gil_scoped_release release;
               r = simulate(s.config.system, s.solution, o);
             }
             return loads(sim_report_to_json(r, s.config.system, s.solution));
           },
           py::arg("trials") = py::none(), py::arg("seed") = py::none(), py::arg("threads") = 0);

  m.def("optimize", &solve, py::arg("config"), py::arg("lambda_") = py::none(),
        py::arg("grid") = py::none(),
        "Solve both applications at the config's lambda, or meet its energy budget.");
  m.def("twin_experiment",
        [](const SystemConfig& cfg, std::optional<std::vector<double>> priors,
           std::optional<double> lambda, std::optional<std::size_t> grid) {
          const Solved s = solve(cfg, lambda, grid);
          std::vector<double> p = priors.value_or(cfg.sweep_priors);
          if (p.empty()) p = {0.05, 0.10, 0.15, 0.20};
          return loads(twin_report_to_json(twin_experiment(
              s.config.system.primary, s.solution.lambda, p, s.grid, s.config.options)));
        },
        py::arg("config"), py::arg("priors") = py::none(), py::arg("lambda_") = py::none(),
        py::arg("grid") = py::none());
}
