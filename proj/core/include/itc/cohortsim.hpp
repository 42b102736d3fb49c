#pragma once

// Simulation of two-arm randomized trials with exponential survival outcomes
// under a proportional-hazards data-generating model.

#include <Eigen/Core>
#include <iosfwd>
#include <string>
#include <vector>

#include "itc/stochastic.hpp"

namespace itc {

/// One baseline covariate: its marginal law and its coefficients in the
/// outcome model.
struct CovariateSpec {
  std::string name;
  DistributionSpec marginal;
  double prognostic_coef = 0.0;   // log-hazard per unit
  double interaction_coef = 0.0;  // log-hazard per unit when treated; 0 = not an effect modifier

  friend bool operator==(const CovariateSpec&, const CovariateSpec&) = default;
};

/// Outcome-generating model of one study. Times are in days.
struct OutcomeModelSpec {
  double treatment_log_hr = 0.0;
  double baseline_rate = 0.5 / 365.0;
  double censoring_rate = 0.1 / 365.0;  // 0 disables censoring
  std::vector<CovariateSpec> covariates;

  /// Throws std::invalid_argument on a non-positive baseline rate, negative
  /// censoring rate or duplicate covariate names.
  void validate() const;

  std::vector<std::string> covariate_names() const;

  friend bool operator==(const OutcomeModelSpec&, const OutcomeModelSpec&) = default;
};

/// Individual-level records of one simulated trial. Row i of every member
/// describes subject i; subject ids are implicit (row index).
struct TrialData {
  std::vector<std::string> covariate_names;
  Eigen::MatrixXd X;        // n x K raw covariate values
  Eigen::VectorXi trt;      // 1 = active, 0 = comparator
  Eigen::VectorXd time;     // follow-up, days
  Eigen::VectorXi status;   // 1 = event, 0 = censored

  Eigen::Index size() const noexcept { return time.size(); }

  /// Column index of a named covariate; throws std::out_of_range.
  Eigen::Index column(const std::string& name) const;

  /// Checks the parallel-vector and value-domain invariants; throws
  /// std::invalid_argument describing the first violation.
  void validate() const;
};

struct SurvivalOutcome {
  Eigen::VectorXd time;
  Eigen::VectorXi status;
};

/// Trial-selection model: logit P(S=1) = theta_age (Age - age_center) + theta_iss ISS.
struct SelectionModelSpec {
  double theta_age = 0.1;
  double theta_iss = 0.1;
  double age_center = 65.0;
  std::string age_column = "Age";
  std::string iss_column = "ISS";
};

/// "Table 1" of an aggregate-level study.
struct AggregateSummary {
  std::vector<std::string> covariate_names;
  Eigen::VectorXd mean;
  Eigen::VectorXd mean_treated;
  Eigen::VectorXd mean_control;
  Eigen::Index n = 0;
  double marginal_log_hr = 0.0;
  double marginal_se = 0.0;
};

/// Column k holds n i.i.d. draws from specs[k].marginal; columns are drawn
/// one after another.
Eigen::MatrixXd simulate_covariates(const std::vector<CovariateSpec>& specs, Eigen::Index n,
                                    RandomStream& stream);

/// LP_i = sum_k b_k x_ik + (b_T + sum_k b_int,k x_ik) trt_i.
Eigen::VectorXd linear_predictor(const Eigen::MatrixXd& X, const Eigen::VectorXi& trt,
                                 const OutcomeModelSpec& model);

/// Latent exponential time with rate baseline_rate * exp(lp), by inversion of u.
double latent_event_time(double u, double lp, double baseline_rate);

/// Draws all n latent-time uniforms first, then (if censoring is enabled)
/// all n censoring times. Follow-up is the minimum; status is 1 iff the
/// latent time does not exceed the censoring time.
SurvivalOutcome simulate_survival(const Eigen::VectorXd& lp, const OutcomeModelSpec& model,
                                  RandomStream& stream);

/// 1:1 allocation: the first n/2 subjects are treated. n must be even.
TrialData simulate_trial(const OutcomeModelSpec& model, Eigen::Index n, RandomStream& stream);

double selection_probability(double age, double iss, const SelectionModelSpec& sel);

/// Bernoulli study-membership draw per row; 1 = study A (S=1).
Eigen::VectorXi assign_study_membership(const Eigen::MatrixXd& X,
                                        const std::vector<std::string>& names,
                                        const SelectionModelSpec& sel, RandomStream& stream);

/// Rows of `trial` whose mask entry equals `keep`.
TrialData subset(const TrialData& trial, const Eigen::VectorXi& mask, int keep);

/// Covariate means plus a univariable Cox fit of outcome on treatment.
AggregateSummary summarize_aggregate(const TrialData& trial);

// CSV layout: subject_id,<covariate names...>,trt,time,status
void write_trial_csv(std::ostream& out, const TrialData& trial);
TrialData read_trial_csv(std::istream& in);

}  // namespace itc
