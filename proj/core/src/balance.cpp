#include "itc/balance.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

namespace itc {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

// exp() overflows just above 709.78.
constexpr double kMaxExponent = 700.0;

}  // namespace

VectorXd MaicWeights::normalized() const {
  const double total = w.sum();
  return total > 0.0 ? VectorXd(w * (static_cast<double>(w.size()) / total)) : w;
}

BalanceProblem center_covariates(const MatrixXd& X_ipd, const VectorXd& target_means,
                                 std::vector<std::string> names) {
  if (X_ipd.cols() != target_means.size()) {
    throw std::invalid_argument("center_covariates: " + std::to_string(X_ipd.cols()) +
                                " covariate columns but " + std::to_string(target_means.size()) +
                                " target means");
  }
  if (!names.empty() && static_cast<Index>(names.size()) != X_ipd.cols()) {
    throw std::invalid_argument("center_covariates: names do not match covariate columns");
  }
  BalanceProblem prob;
  prob.Xc = X_ipd.rowwise() - target_means.transpose();
  prob.target_means = target_means;
  prob.covariate_names = std::move(names);
  return prob;
}

ObjectiveValue objective_and_gradient(const VectorXd& alpha, const BalanceProblem& prob) {
  if (alpha.size() != prob.Xc.cols()) {
    throw std::invalid_argument("objective_and_gradient: alpha has wrong dimension");
  }
  const VectorXd exponent = prob.Xc * alpha;
  if (exponent.size() > 0 && !(exponent.maxCoeff() <= kMaxExponent)) {
    return {std::numeric_limits<double>::infinity(), VectorXd()};
  }
  const VectorXd w = exponent.array().exp();
  return {w.sum(), prob.Xc.transpose() * w};
}

BfgsResult bfgs_minimize(const Evaluator& evaluator, Index dimension,
                         const OptimizerSettings& settings) {
  if (!(settings.grad_tol > 0.0)) throw std::invalid_argument("bfgs_minimize: grad_tol must be positive");
  if (settings.max_iters < 1) throw std::invalid_argument("bfgs_minimize: max_iters must be positive");

  BfgsResult r;
  r.alpha = settings.initial_alpha.size() == 0 ? VectorXd::Zero(dimension) : settings.initial_alpha;
  if (r.alpha.size() != dimension) {
    throw std::invalid_argument("bfgs_minimize: initial_alpha has wrong dimension");
  }
  ObjectiveValue current = evaluator(r.alpha);
  if (!std::isfinite(current.value)) {
    throw std::invalid_argument("bfgs_minimize: objective is not finite at the starting point");
  }
  r.accepted_values.push_back(current.value);

  constexpr double kArmijo = 1e-4;
  constexpr int kMaxBacktracks = 60;
  MatrixXd H = MatrixXd::Identity(dimension, dimension);
  bool H_is_initial = true;
  r.status = OptimizerStatus::MaxIterations;

  for (;;) {
    r.grad_norm = current.gradient.lpNorm<Eigen::Infinity>();
    if (r.grad_norm <= settings.grad_tol) {
      r.status = OptimizerStatus::Converged;
      break;
    }
    if (r.alpha.norm() > settings.divergence_norm) {
      r.status = OptimizerStatus::Diverged;
      break;
    }
    if (r.iterations >= settings.max_iters) break;

    VectorXd direction = -H * current.gradient;
    double slope = current.gradient.dot(direction);
    if (!(slope < 0.0)) {
      H.setIdentity();
      H_is_initial = true;
      direction = -current.gradient;
      slope = current.gradient.dot(direction);
    }
    if (H_is_initial) {
      // Unscaled steepest descent: cap the first trial step at unit length.
      const double longest = direction.lpNorm<Eigen::Infinity>();
      if (longest > 1.0) {
        direction /= longest;
        slope /= longest;
      }
    }

    // Below this, differences in Q are summation noise.
    const double flat = 1e-12 * std::abs(current.value);
    double t = 1.0;
    bool accepted = false;
    VectorXd trial;
    ObjectiveValue next;
    for (int k = 0; k < kMaxBacktracks && -t * slope > flat; ++k, t *= 0.5) {
      trial = r.alpha + t * direction;
      next = evaluator(trial);
      if (std::isfinite(next.value) && next.value <= current.value + kArmijo * t * slope) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      // Near the minimum the predicted decrease falls below the rounding error
      // of Q, so Armijo cannot tell good steps from bad. Search instead for a
      // root of the directional derivative, which is monotone since Q is convex.
      auto derivative = [&](double step, ObjectiveValue& at) {
        at = evaluator(r.alpha + step * direction);
        return std::isfinite(at.value) ? at.gradient.dot(direction)
                                       : std::numeric_limits<double>::infinity();
      };
      double lo = 0.0, d_lo = slope;
      double hi = 1.0;
      ObjectiveValue at_hi;
      double d_hi = derivative(hi, at_hi);
      for (int k = 0; k < 30 && d_hi < 0.0; ++k) {
        lo = hi;
        d_lo = d_hi;
        hi *= 2.0;
        d_hi = derivative(hi, at_hi);
      }
      for (int k = 0; k < 60; ++k) {
        const bool secant_ok = std::isfinite(d_hi) && d_hi > d_lo;
        double mid = secant_ok ? lo - d_lo * (hi - lo) / (d_hi - d_lo) : 0.5 * (lo + hi);
        if (!(mid > lo && mid < hi)) mid = 0.5 * (lo + hi);
        ObjectiveValue at_mid;
        const double d_mid = derivative(mid, at_mid);
        // By convexity a point this close to the line minimum does not raise Q.
        if (std::isfinite(at_mid.value) && std::abs(d_mid) <= 0.1 * std::abs(slope)) {
          trial = r.alpha + mid * direction;
          next = std::move(at_mid);
          accepted = true;
          break;
        }
        if (d_mid < 0.0) {
          lo = mid;
          d_lo = d_mid;
        } else {
          hi = mid;
          d_hi = d_mid;
        }
      }
    }
    if (!accepted) {
      r.status = OptimizerStatus::LineSearchFailed;
      break;
    }

    const VectorXd s = trial - r.alpha;
    const VectorXd y = next.gradient - current.gradient;
    const double sy = s.dot(y);
    if (sy > 1e-14 * s.norm() * y.norm()) {
      if (H_is_initial) {
        H *= sy / y.squaredNorm();
        H_is_initial = false;
      }
      const double rho = 1.0 / sy;
      const VectorXd Hy = H * y;
      // Sherman-Morrison form of (I - rho s y') H (I - rho y s') + rho s s'.
      H += (rho * rho * y.dot(Hy) + rho) * (s * s.transpose()) -
           rho * (Hy * s.transpose() + s * Hy.transpose());
    }

    r.alpha = std::move(trial);
    current = std::move(next);
    ++r.iterations;
    r.accepted_values.push_back(current.value);
  }

  r.value = current.value;
  r.gradient = current.gradient;
  return r;
}

MaicWeights estimate_weights(const BalanceProblem& prob, const OptimizerSettings& settings) {
  const Index n = prob.Xc.rows();
  const Index K = prob.Xc.cols();
  if (K < 1) throw std::invalid_argument("estimate_weights: no covariates to balance");
  if (n <= K) throw std::invalid_argument("estimate_weights: need more subjects than covariates");

  auto name_of = [&](Index k) {
    return static_cast<Index>(prob.covariate_names.size()) > k
               ? prob.covariate_names[static_cast<std::size_t>(k)]
               : "#" + std::to_string(k);
  };

  // A target on or beyond a marginal range edge is outside the hull.
  for (Index k = 0; k < K; ++k) {
    const double lo = prob.Xc.col(k).minCoeff();
    const double hi = prob.Xc.col(k).maxCoeff();
    if ((lo != 0.0 || hi != 0.0) && !(lo < 0.0 && hi > 0.0)) {
      throw BalanceError(BalanceError::Kind::TargetOutsideSupport,
                         "target mean of '" + name_of(k) +
                             "' lies outside the range of the individual-level data");
    }
  }

  const BfgsResult opt = bfgs_minimize(
      [&](const VectorXd& a) { return objective_and_gradient(a, prob); }, K, settings);
  if (opt.status == OptimizerStatus::Diverged) {
    throw BalanceError(BalanceError::Kind::TargetOutsideSupport,
                       "weight estimation diverged: target means lie outside the convex hull of "
                       "the individual-level covariates");
  }

  MaicWeights out;
  out.alpha = opt.alpha;
  out.w = (prob.Xc * opt.alpha).array().exp();
  out.ess = effective_sample_size(out.w);
  out.converged = opt.converged();
  out.grad_norm = opt.grad_norm;
  out.iterations = opt.iterations;

  // The gradient can vanish along a receding direction without balancing
  // the means; that is the same hull violation seen from the other side.
  const double gap = (prob.Xc.transpose() * out.w).lpNorm<Eigen::Infinity>() / out.w.sum();
  if (out.converged && gap > 1e-6) {
    throw BalanceError(BalanceError::Kind::TargetOutsideSupport,
                       "weights cannot reproduce the target means: targets lie outside the "
                       "convex hull of the individual-level covariates");
  }
  return out;
}

double effective_sample_size(const VectorXd& w) {
  if (w.size() == 0) throw std::invalid_argument("effective_sample_size: no weights");
  if (!(w.minCoeff() > 0.0) || !w.allFinite()) {
    throw std::invalid_argument("effective_sample_size: weights must be positive and finite");
  }
  const double scale = w.maxCoeff();
  const VectorXd v = w / scale;
  return v.sum() * v.sum() / v.squaredNorm();
}

double BalanceReport::max_gap() const noexcept {
  double m = 0.0;
  for (const auto& row : rows) m = std::max(m, row.abs_gap);
  return m;
}

BalanceReport balance_report(const MatrixXd& X_ipd, const std::vector<std::string>& names,
                             const VectorXd& w, const VectorXd& target_means) {
  const Index K = X_ipd.cols();
  if (static_cast<Index>(names.size()) != K || target_means.size() != K ||
      w.size() != X_ipd.rows()) {
    throw std::invalid_argument("balance_report: inconsistent dimensions");
  }
  BalanceReport report;
  report.ess = effective_sample_size(w);
  report.ess_fraction = report.ess / static_cast<double>(w.size());
  const VectorXd unit = VectorXd::Ones(w.size());
  const double total = w.sum();
  for (Index k = 0; k < K; ++k) {
    BalanceRow row;
    row.covariate = names[static_cast<std::size_t>(k)];
    row.ipd_mean = X_ipd.col(k).dot(unit) / unit.sum();
    row.weighted_mean = X_ipd.col(k).dot(w) / total;
    row.target_mean = target_means[k];
    row.abs_gap = std::abs(row.weighted_mean - row.target_mean);
    report.rows.push_back(row);
  }
  return report;
}

void write_balance_tsv(std::ostream& out, const BalanceReport& report) {
  const auto old_precision = out.precision(10);
  out << "covariate\tipd_mean\tweighted_mean\ttarget_mean\tabs_gap\n";
  for (const auto& row : report.rows) {
    out << row.covariate << '\t' << row.ipd_mean << '\t' << row.weighted_mean << '\t'
        << row.target_mean << '\t' << row.abs_gap << '\n';
  }
  out << "ESS\t" << report.ess << '\t' << report.ess_fraction << '\n';
  out.precision(old_precision);
}

}  // namespace itc
