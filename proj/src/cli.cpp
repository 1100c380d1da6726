#include "cascade/cli.hpp"

#include <filesystem>
#include <optional>
#include <ostream>

#include "CLI11.hpp"
#include "cascade/config.hpp"
#include "cascade/errors.hpp"
#include "cascade/io.hpp"
#include "json.hpp"

namespace cascade {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const char* kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::Config: return "config";
    case ErrorKind::Solver: return "solver";
    case ErrorKind::EnumerationCap: return "enumeration_cap";
    case ErrorKind::Bracket: return "bracket";
  }
  return "unknown";
}

int report_error(std::ostream& err, const std::string& kind, const std::string& message,
                 int code) {
  err << json{{"error", kind}, {"message", message}, {"exit_code", code}}.dump() << "\n";
  return code;
}

struct Common {
  std::string config;
  std::optional<double> lambda;
  std::optional<double> budget_mJ;
  std::optional<std::size_t> grid;
  std::string out_dir = ".";
  bool no_sharing = false;
  bool early_positive = false;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "System description (JSON)")->required();
  auto* l = cmd->add_option("--lambda", c.lambda, "Resource weight; overrides the config");
  auto* b = cmd->add_option("--budget-mJ", c.budget_mJ, "Per-frame energy budget in mJ");
  l->excludes(b);
  cmd->add_option("--grid", c.grid, "Belief grid size M");
  cmd->add_option("--out-dir", c.out_dir, "Directory for artifacts");
  cmd->add_flag("--no-sharing", c.no_sharing, "Secondary never selects the primary feature");
  cmd->add_flag("--allow-early-positive", c.early_positive,
                "Allow declaring positive before the last stage");
}

struct Prepared {
  SystemConfig cfg;
  Grid grid;
  double lambda = 0.0;
  std::optional<LambdaResult> solved;
};

Prepared prepare(const Common& c) {
  Prepared p;
  p.cfg = load_config(c.config);
  if (c.grid) p.cfg.grid = *c.grid;
  if (p.cfg.grid < 2) throw ConfigError("grid must have at least 2 points");
  if (c.no_sharing) p.cfg.options.allow_sharing = false;
  if (c.early_positive) p.cfg.options.allow_early_positive = true;
  if (c.lambda) {
    p.cfg.lambda = *c.lambda;
    p.cfg.budget.reset();
  } else if (c.budget_mJ) {
    BudgetSpec b = p.cfg.budget.value_or(BudgetSpec{});
    b.budget_mJ = *c.budget_mJ;
    p.cfg.budget = b;
    p.cfg.lambda.reset();
  }
  p.cfg.validate();
  p.grid = Grid::uniform(p.cfg.grid);
  if (p.cfg.lambda) {
    p.lambda = *p.cfg.lambda;
  } else {
    p.solved = solve_lambda(*p.cfg.budget, p.cfg.system, p.grid, p.grid, p.cfg.options);
    p.lambda = p.solved->lambda;
  }
  return p;
}

SystemSolution solution_for(Prepared& p) {
  if (p.solved) return p.solved->solution;
  return solve_system(p.cfg.system, p.lambda, p.grid, p.grid, p.cfg.options);
}

fs::path out_path(const Common& c, const std::string& name) {
  fs::create_directories(c.out_dir);
  return fs::path(c.out_dir) / name;
}

std::string budget_json_for(const Prepared& p, const SystemSolution& s) {
  const double baseline = p.cfg.budget ? p.cfg.budget->baseline_mJ : 0.0;
  const ResourceUsage u = expected_resource(p.cfg.system, s, baseline);
  if (p.solved) return budget_to_json(u, p.lambda, p.solved->slack, &*p.solved);
  return budget_to_json(u, p.lambda, false);
}

std::vector<double> sweep_priors(const SystemConfig& cfg, const std::vector<double>& flag) {
  if (!flag.empty()) return flag;
  if (!cfg.sweep_priors.empty()) return cfg.sweep_priors;
  return {0.05, 0.10, 0.15, 0.20};
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Threshold optimizer and validation harness for two-application detection "
               "cascades with feature sharing",
               "cascade"};
  app.require_subcommand(1);

  Common opt, sim, twin, chk, swp;
  auto* c_opt = app.add_subcommand("optimize", "Solve the DP; write policy, values, budget");
  add_common(c_opt, opt);

  auto* c_sim = app.add_subcommand("simulate", "Monte Carlo evaluation of the optimal policies");
  add_common(c_sim, sim);
  std::optional<std::uint64_t> trials, seed;
  std::uint64_t dump = 0;
  unsigned threads = 0;
  c_sim->add_option("--trials", trials, "Number of simulated frames");
  c_sim->add_option("--seed", seed, "RNG seed");
  c_sim->add_option("--dump-trials", dump, "Write the first N trials to trials.csv");
  c_sim->add_option("--threads", threads, "Worker threads (0: all cores)");

  std::vector<double> twin_priors, sweep_priors_flag;
  auto* c_twin = app.add_subcommand("twin", "Twin-comparison experiment over a prior sweep");
  add_common(c_twin, twin);
  c_twin->add_option("--priors", twin_priors, "Priors to sweep");

  auto* c_est = app.add_subcommand("estimate", "Estimate PMFs from labeled score CSVs");
  std::vector<std::string> score_files;
  std::size_t bins = 100;
  std::string est_out = ".";
  c_est->add_option("--scores", score_files, "CSV files with header score,label")->required();
  c_est->add_option("--bins", bins, "Number of quantization bins");
  c_est->add_option("--out-dir", est_out, "Directory for <name>.pmf.json files");

  auto* c_chk = app.add_subcommand("check", "Sharing and cascade-optimality conditions");
  add_common(c_chk, chk);

  auto* c_swp = app.add_subcommand("sweep", "Prior sweep as plot-ready CSV");
  add_common(c_swp, swp);
  c_swp->add_option("--priors", sweep_priors_flag, "Priors to sweep");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    return report_error(err, "usage", e.what(), static_cast<int>(ErrorKind::Config));
  }

  try {
    if (c_opt->parsed()) {
      Prepared p = prepare(opt);
      const SystemSolution s = solution_for(p);
      write_text(out_path(opt, "policy.json").string(), policy_to_json(p.cfg.system, s));
      for (std::size_t i = 0; i <= p.cfg.system.stage_count(); ++i) {
        write_text(out_path(opt, "values_stage_" + std::to_string(i) + ".csv").string(),
                   values_csv(s, i));
        write_text(out_path(opt, "secondary_with_stage_" + std::to_string(i) + ".csv").string(),
                   secondary_with_csv(s, i));
      }
      const std::string b = budget_json_for(p, s);
      write_text(out_path(opt, "budget.json").string(), b);
      out << b;
      return 0;
    }
    if (c_sim->parsed()) {
      Prepared p = prepare(sim);
      if (trials) p.cfg.trials = *trials;
      if (seed) p.cfg.seed = *seed;
      if (p.cfg.trials < 1) throw ConfigError("trials must be at least 1");
      const SystemSolution s = solution_for(p);
      SimOptions so;
      so.trials = p.cfg.trials;
      so.seed = p.cfg.seed;
      so.threads = threads;
      const SimResult r = simulate(p.cfg.system, s, so);
      const std::string report = sim_report_to_json(r, p.cfg.system, s);
      write_text(out_path(sim, "report.json").string(), report);
      if (dump > 0) {
        std::string csv = trials_csv_header();
        for (std::uint64_t t = 0; t < std::min<std::uint64_t>(dump, so.trials); ++t)
          csv += trial_csv_row(run_trial(p.cfg.system, s, so.seed, t));
        write_text(out_path(sim, "trials.csv").string(), csv);
      }
      out << report;
      return 0;
    }
    if (c_twin->parsed() || c_swp->parsed()) {
      const bool is_twin = c_twin->parsed();
      const Common& c = is_twin ? twin : swp;
      Prepared p = prepare(c);
      const auto priors = sweep_priors(p.cfg, is_twin ? twin_priors : sweep_priors_flag);
      for (double x : priors)
        if (!(x > 0.0 && x < 1.0)) throw ConfigError("priors must lie in (0, 1)");
      const TwinReport r =
          twin_experiment(p.cfg.system.primary, p.lambda, priors, p.grid, p.cfg.options);
      if (is_twin) {
        const std::string j = twin_report_to_json(r);
        write_text(out_path(c, "report.json").string(), j);
        out << j;
      } else {
        const std::string csv = twin_report_to_csv(r);
        write_text(out_path(c, "sweep.csv").string(), csv);
        out << csv;
      }
      return 0;
    }
    if (c_est->parsed()) {
      fs::create_directories(est_out);
      json summary = json::array();
      for (const auto& f : score_files) {
        const auto scores = read_scores_csv(f);
        EstimatedPmf e;
        try {
          e = estimate_pmf(scores, bins);
        } catch (const std::invalid_argument& ex) {
          throw ConfigError(f + ": " + ex.what());
        }
        const fs::path target = fs::path(est_out) / (fs::path(f).stem().string() + ".pmf.json");
        write_text(target.string(), pmf_to_json(e));
        summary.push_back({{"scores", f}, {"pmf", target.string()}, {"rows", scores.size()}});
      }
      out << summary.dump(2) << "\n";
      return 0;
    }
    if (c_chk->parsed()) {
      Prepared p = prepare(chk);
      const SystemSolution s = solution_for(p);
      const SharingCheck sc = check_sharing_condition(s.secondary, p.cfg.system.primary,
                                                      p.cfg.system.secondary,
                                                      p.cfg.system.shared, p.lambda);
      const std::string j = checks_to_json(sc, check_cascade_optimality(s.primary, p.cfg.system.primary),
                                           check_cascade_optimality(s.secondary, p.cfg.system.secondary));
      write_text(out_path(chk, "check.json").string(), j);
      out << j;
      return 0;
    }
  } catch (const Error& e) {
    return report_error(err, kind_name(e.kind()), e.what(), static_cast<int>(e.kind()));
  } catch (const std::exception& e) {
    return report_error(err, "internal", e.what(), 1);
  }
  return 0;
}

}  // namespace cascade
