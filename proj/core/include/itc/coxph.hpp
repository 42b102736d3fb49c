#pragma once

// Weighted Cox proportional-hazards regression with Breslow ties.
//
// Log partial likelihood, with case weights w and risk set R(t) = {j : t_j >= t}:
//
//   l(beta) = sum_{i : status_i = 1} w_i [ beta'z_i - log sum_{j in R(t_i)} w_j exp(beta'z_j) ]
//
// The baseline hazard is never estimated.

#include <Eigen/Core>
#include <stdexcept>
#include <vector>
#include <string>

namespace itc {

struct SurvivalSample {
  Eigen::VectorXd time;
  Eigen::VectorXi status;
  Eigen::MatrixXd Z;  // n x p design
  Eigen::VectorXd w;  // case weights

  /// Unit weights.
  static SurvivalSample unweighted(Eigen::VectorXd time, Eigen::VectorXi status, Eigen::MatrixXd Z);

  /// Throws std::invalid_argument on inconsistent dimensions, non-positive
  /// times or weights, or status outside {0,1}. Absence of events is left to
  /// fit_cox, which reports it as CoxError::Kind::NoEvents.
  void validate() const;
};

class CoxError : public std::runtime_error {
 public:
  enum class Kind { SingularInformation, MonotoneLikelihood, NoEvents, NotConverged };

  CoxError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

struct CoxSettings {
  double score_tol = 1e-9;  // infinity norm of the score
  int max_iterations = 50;
  int max_halvings = 10;
  double max_abs_beta = 15.0;  // beyond this the likelihood is taken to be monotone
};

struct CoxFit {
  Eigen::VectorXd beta;
  Eigen::VectorXd se_model;
  Eigen::VectorXd se_robust;
  Eigen::MatrixXd information;  // observed information at beta
  double loglik_at_solution = 0.0;
  double loglik_at_zero = 0.0;
  std::vector<double> loglik_trace;  // l at beta = 0, then after each accepted step
  int iterations = 0;
  bool converged = false;
  double score_norm = 0.0;
  Eigen::Index tied_event_times = 0;  // event times shared by more than one event
};

struct ScoreInformation {
  Eigen::VectorXd score;
  Eigen::MatrixXd information;
};

double partial_loglik(const Eigen::VectorXd& beta, const SurvivalSample& data);

/// Analytic gradient and negative Hessian of partial_loglik.
ScoreInformation score_and_information(const Eigen::VectorXd& beta, const SurvivalSample& data);

/// Newton-Raphson from beta = 0 with step-halving. Fills se_model; se_robust
/// is filled too (the sandwich is cheap relative to the fit).
CoxFit fit_cox(const SurvivalSample& data, const CoxSettings& settings = {});

/// Per-subject score residuals U_i (n x p, unweighted): sum_i w_i U_i equals the score.
Eigen::MatrixXd score_residuals(const Eigen::VectorXd& beta, const SurvivalSample& data);

/// Sandwich I^-1 (sum_i w_i^2 U_i U_i') I^-1 at the fitted coefficients.
Eigen::MatrixXd robust_variance(const CoxFit& fit, const SurvivalSample& data);

}  // namespace itc
