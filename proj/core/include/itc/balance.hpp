#pragma once

// Matching-adjusted weights by exponential tilting.
//
// With IPD covariates centered on the aggregate-study means (Xc), the weights
// w_i = exp(Xc_i . alpha) at the minimizer of the convex objective
//
//   Q(alpha) = sum_i exp(Xc_i . alpha)
//
// satisfy sum_i w_i Xc_i = 0, i.e. the weighted IPD means equal the targets.

#include <Eigen/Core>
#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace itc {

struct BalanceProblem {
  Eigen::MatrixXd Xc;  // n x K, raw columns minus target means
  Eigen::VectorXd target_means;
  std::vector<std::string> covariate_names;
};

struct ObjectiveValue {
  double value = 0.0;
  Eigen::VectorXd gradient;
};

using Evaluator = std::function<ObjectiveValue(const Eigen::VectorXd&)>;

struct OptimizerSettings {
  double grad_tol = 1e-8;  // infinity norm
  int max_iters = 500;
  Eigen::VectorXd initial_alpha;  // empty = zero vector
  // Iterates whose 2-norm exceeds this while the gradient is still above
  // tolerance are reported as diverged.
  double divergence_norm = 50.0;
};

enum class OptimizerStatus { Converged, MaxIterations, Diverged, LineSearchFailed };

struct BfgsResult {
  Eigen::VectorXd alpha;
  double value = 0.0;
  Eigen::VectorXd gradient;
  double grad_norm = 0.0;
  int iterations = 0;
  OptimizerStatus status = OptimizerStatus::MaxIterations;
  std::vector<double> accepted_values;  // objective at the start point and each accepted iterate

  bool converged() const noexcept { return status == OptimizerStatus::Converged; }
};

struct MaicWeights {
  Eigen::VectorXd alpha;
  Eigen::VectorXd w;  // raw exp(Xc alpha)
  double ess = 0.0;
  bool converged = false;
  double grad_norm = 0.0;
  int iterations = 0;

  /// Weights rescaled to sum to n (display only; Cox estimates are invariant).
  Eigen::VectorXd normalized() const;
};

class BalanceError : public std::runtime_error {
 public:
  enum class Kind { TargetOutsideSupport, NotConverged };

  BalanceError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

BalanceProblem center_covariates(const Eigen::MatrixXd& X_ipd, const Eigen::VectorXd& target_means,
                                 std::vector<std::string> names = {});

/// Q and its gradient. Returns +inf (and an empty gradient) when any
/// exponent would overflow.
ObjectiveValue objective_and_gradient(const Eigen::VectorXd& alpha, const BalanceProblem& prob);

/// BFGS with an inverse-Hessian update and Armijo backtracking.
BfgsResult bfgs_minimize(const Evaluator& evaluator, Eigen::Index dimension,
                         const OptimizerSettings& settings = {});

/// Throws BalanceError::TargetOutsideSupport when the targets are not inside
/// the convex hull of the IPD (no finite minimizer exists), and
/// BalanceError::NotConverged when the optimizer stalls short of tolerance.
MaicWeights estimate_weights(const BalanceProblem& prob, const OptimizerSettings& settings = {});

/// (sum w)^2 / sum w^2.
double effective_sample_size(const Eigen::VectorXd& w);

struct BalanceRow {
  std::string covariate;
  double ipd_mean = 0.0;
  double weighted_mean = 0.0;
  double target_mean = 0.0;
  double abs_gap = 0.0;
};

struct BalanceReport {
  std::vector<BalanceRow> rows;
  double ess = 0.0;
  double ess_fraction = 0.0;  // ess / n

  double max_gap() const noexcept;
};

BalanceReport balance_report(const Eigen::MatrixXd& X_ipd, const std::vector<std::string>& names,
                             const Eigen::VectorXd& w, const Eigen::VectorXd& target_means);

// covariate, ipd_mean, weighted_mean, target_mean, abs_gap; then "ESS <ess> <ess/n>".
void write_balance_tsv(std::ostream& out, const BalanceReport& report);

}  // namespace itc
