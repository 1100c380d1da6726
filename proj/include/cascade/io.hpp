#pragma once

// Artifact writers and readers. Numbers are written with 17 significant
// digits so every double survives a round trip unchanged.

#include <string>
#include <vector>

#include "cascade/budget.hpp"
#include "cascade/dp.hpp"
#include "cascade/models.hpp"
#include "cascade/sim.hpp"
#include "cascade/system.hpp"

namespace cascade {

std::string format_double(double x);

std::string policy_to_json(const SystemModel& system, const SystemSolution& solution);

/// Thresholds recovered from policy.json.
struct PolicyThresholds {
  double lambda = 0.0;
  std::vector<double> primary_tau;
  std::vector<double> primary_decision_tau;
  std::vector<double> secondary_tau;
  std::vector<double> secondary_decision_tau;
  std::string secondary_stage0;
};
PolicyThresholds policy_from_json(const std::string& text);

/// values_stage_i.csv: header `app,belief,value`; primary rows then the
/// secondary's primary-stopped rows.
std::string values_csv(const SystemSolution& solution, std::size_t stage);

/// secondary_with_stage_i.csv: header `belief2,belief1,value`.
std::string secondary_with_csv(const SystemSolution& solution, std::size_t stage);

struct ValueRow {
  std::string app;
  double belief;
  double value;
};
std::vector<ValueRow> parse_values_csv(const std::string& text);

std::string budget_to_json(const ResourceUsage& usage, double lambda, bool slack,
                           const LambdaResult* solve = nullptr);

std::string sim_report_to_json(const SimResult& sim, const SystemModel& system,
                               const SystemSolution& solution);

std::string twin_report_to_json(const TwinReport& report);
std::string twin_report_to_csv(const TwinReport& report);

std::string trials_csv_header();
std::string trial_csv_row(const TrialOutcome& t);

std::string checks_to_json(const SharingCheck& sharing, const CascadeOptimalityCheck& primary,
                           const CascadeOptimalityCheck& secondary);

/// `{bins, edges, p0, p1}`.
std::string pmf_to_json(const EstimatedPmf& pmf);

/// CSV with header `score,label`, label in {0, 1}. Throws ConfigError on
/// malformed rows.
std::vector<LabeledScore> read_scores_csv(const std::string& path);
std::vector<LabeledScore> parse_scores_csv(const std::string& text);

void write_text(const std::string& path, const std::string& content);
std::string read_text(const std::string& path);

}  // namespace cascade
