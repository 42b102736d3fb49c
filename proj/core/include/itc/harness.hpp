#pragma once

// Scenario configuration and the end-to-end anchored comparison pipeline:
// simulate both studies, reduce study B to aggregate data, weight study A to
// B's covariate means, fit, and compare.

#include <Eigen/Core>
#include <cstdint>
#include <iosfwd>
#include <nlohmann/json.hpp>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "itc/balance.hpp"
#include "itc/cohortsim.hpp"
#include "itc/estimands.hpp"

namespace itc {

struct StudySpec {
  std::string label;
  OutcomeModelSpec model;

  friend bool operator==(const StudySpec&, const StudySpec&) = default;
};

struct InteractionSpec {
  std::string covariate;
  double coef = 0.0;

  friend bool operator==(const InteractionSpec&, const InteractionSpec&) = default;
};

struct ScenarioConfig {
  std::string name = "scenario";
  std::uint64_t seed = 555;
  Eigen::Index n = 100000;
  StudySpec study_A;  // IPD study, A vs C
  StudySpec study_B;  // ALD study, B vs C
  std::vector<std::string> balance_set;
  std::vector<std::string> adjustment_set;  // for the conditional fits
  std::optional<InteractionSpec> interaction;  // treatment-by-covariate term added to both studies
  std::string output_dir;

  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

/// Thrown by parse_config; path() names the offending field, e.g.
/// "study_A.covariates[1].distribution.lambda".
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string path, const std::string& message)
      : std::runtime_error(path + ": " + message), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

/// A pipeline failure annotated with the stage that raised it.
class PipelineError : public std::runtime_error {
 public:
  PipelineError(std::string stage, const std::string& message)
      : std::runtime_error("[" + stage + "] " + message), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

/// Appendix population and outcome parameters, Scenario 1 balance set.
ScenarioConfig appendix_defaults();

/// Missing fields take appendix defaults; unknown fields are errors.
ScenarioConfig parse_config(const std::string& text);
ScenarioConfig parse_config(const nlohmann::json& doc);
inline ScenarioConfig parse_config(const char* text) { return parse_config(std::string(text)); }
nlohmann::json config_to_json(const ScenarioConfig& cfg);

/// Checks cross-field constraints; throws ConfigError.
void validate_config(const ScenarioConfig& cfg);

/// Study models with the configured interaction applied.
OutcomeModelSpec effective_model(const ScenarioConfig& cfg, const StudySpec& study);

struct ScenarioResult {
  std::string name;
  Eigen::Index n = 0;
  EffectEstimate marginal_AC_S1;
  EffectEstimate conditional_AC_S1;
  EffectEstimate marginal_BC_S2;
  EffectEstimate conditional_BC_S2;
  EffectEstimate maic_AC_S2;
  double ess = 0.0;
  double hr_ratio_marginal = 0.0;
  double hr_ratio_conditional = 0.0;
  IndirectComparison bucher;
  BalanceReport balance;
  MaicWeights weights;
};

ScenarioResult run_scenario(const ScenarioConfig& cfg);

struct Tolerance {
  std::optional<double> lo;
  std::optional<double> hi;

  bool admits(double value) const;
};

struct ReportRow {
  std::string quantity;
  double ours = 0.0;
  std::optional<double> paper;
  Tolerance tol;
  bool pass = false;
};

struct AppendixReport {
  std::uint64_t seed = 0;
  std::vector<ReportRow> rows;
  std::vector<ScenarioResult> scenarios;

  bool all_pass() const;
};

struct ReplicationSettings {
  std::uint64_t seed = 555;
  Eigen::Index n = 100000;
  Eigen::Index truth_n = 1000000;  // cohort size for the simulation-based true effects
};

/// Scenarios 1-4 and the true marginal effects, checked against the
/// published values.
AppendixReport replicate_appendix(const ReplicationSettings& settings = {});

nlohmann::json to_json(const EffectEstimate& e);
nlohmann::json to_json(const IndirectComparison& c);
nlohmann::json to_json(const ScenarioResult& r);
nlohmann::json to_json(const AppendixReport& report);

void write_report_tsv(std::ostream& out, const AppendixReport& report);
void write_scenario_tsv(std::ostream& out, const ScenarioResult& r);

}  // namespace itc
