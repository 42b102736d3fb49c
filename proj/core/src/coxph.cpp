#include "itc/coxph.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace itc {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

// Subjects ordered by decreasing time, partitioned into groups of equal time.
// Walking the groups in order grows the risk set one group at a time.
struct RiskSetIndex {
  std::vector<Index> order;
  std::vector<Index> group_start;  // group g spans order[group_start[g], group_start[g+1])

  explicit RiskSetIndex(const VectorXd& time) : order(static_cast<std::size_t>(time.size())) {
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Index a, Index b) { return time[a] > time[b]; });
    for (std::size_t k = 0; k < order.size(); ++k) {
      if (k == 0 || time[order[k]] != time[order[k - 1]]) group_start.push_back(static_cast<Index>(k));
    }
    group_start.push_back(static_cast<Index>(order.size()));
  }

  std::size_t groups() const noexcept { return group_start.size() - 1; }
};

struct Evaluation {
  double loglik = 0.0;
  VectorXd score;
  MatrixXd information;
};

// Shifted linear predictor: eta - max(eta). Risk-set sums are formed on this
// scale and the shift is added back inside the log.
VectorXd shifted_eta(const VectorXd& beta, const SurvivalSample& data, double& shift) {
  VectorXd eta = data.Z * beta;
  shift = eta.size() > 0 ? eta.maxCoeff() : 0.0;
  return eta.array() - shift;
}

Evaluation evaluate(const VectorXd& beta, const SurvivalSample& data, const RiskSetIndex& idx,
                    bool derivatives) {
  const Index p = data.Z.cols();
  const auto P = static_cast<std::size_t>(p);
  double shift = 0.0;
  const VectorXd eta = shifted_eta(beta, data, shift);

  // Row-major design: the walk below touches one subject at a time.
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> Z = data.Z;

  // Extended precision: the risk-set sums run over up to n terms and the
  // score is a difference of nearly equal quantities.
  using acc = long double;
  acc s0 = 0.0;
  std::vector<acc> s1(P, 0.0), s2(P * P, 0.0), event_wz(P), zbar(P);
  std::vector<acc> score(P, 0.0), info(P * P, 0.0);
  acc loglik = 0.0;

  for (std::size_t g = 0; g < idx.groups(); ++g) {
    acc event_weight = 0.0;
    acc event_weta = 0.0;
    std::fill(event_wz.begin(), event_wz.end(), 0.0);

    for (Index k = idx.group_start[g]; k < idx.group_start[g + 1]; ++k) {
      const Index i = idx.order[static_cast<std::size_t>(k)];
      const double* z = Z.data() + i * p;
      const acc r = static_cast<acc>(data.w[i]) * std::exp(static_cast<acc>(eta[i]));
      s0 += r;
      if (derivatives) {
        for (std::size_t a = 0; a < P; ++a) {
          const acc rz = r * z[a];
          s1[a] += rz;
          for (std::size_t b = 0; b <= a; ++b) s2[a * P + b] += rz * z[b];
        }
      }
      if (data.status[i] == 1) {
        event_weight += data.w[i];
        event_weta += data.w[i] * eta[i];
        if (derivatives) {
          for (std::size_t a = 0; a < P; ++a) event_wz[a] += data.w[i] * z[a];
        }
      }
    }
    if (event_weight == 0.0) continue;

    loglik += event_weta - event_weight * std::log(s0);
    if (derivatives) {
      for (std::size_t a = 0; a < P; ++a) zbar[a] = s1[a] / s0;
      for (std::size_t a = 0; a < P; ++a) {
        score[a] += event_wz[a] - event_weight * zbar[a];
        for (std::size_t b = 0; b <= a; ++b) {
          info[a * P + b] += event_weight * (s2[a * P + b] / s0 - zbar[a] * zbar[b]);
        }
      }
    }
  }

  Evaluation out;
  out.loglik = static_cast<double>(loglik);
  if (derivatives) {
    out.score.resize(p);
    for (Index a = 0; a < p; ++a) out.score[a] = static_cast<double>(score[static_cast<std::size_t>(a)]);
    out.information.resize(p, p);
    for (Index a = 0; a < p; ++a) {
      for (Index b = 0; b <= a; ++b) {
        out.information(a, b) = out.information(b, a) =
            static_cast<double>(info[static_cast<std::size_t>(a * p + b)]);
      }
    }
  }
  return out;
}

Eigen::Index count_tied_event_times(const SurvivalSample& data, const RiskSetIndex& idx) {
  Index tied = 0;
  for (std::size_t g = 0; g < idx.groups(); ++g) {
    int events = 0;
    for (Index k = idx.group_start[g]; k < idx.group_start[g + 1]; ++k) {
      events += data.status[idx.order[static_cast<std::size_t>(k)]];
    }
    if (events > 1) ++tied;
  }
  return tied;
}

MatrixXd residuals(const VectorXd& beta, const SurvivalSample& data, const RiskSetIndex& idx) {
  const Index n = data.Z.rows();
  const Index p = data.Z.cols();
  const auto P = static_cast<std::size_t>(p);
  double shift = 0.0;
  const VectorXd rel_risk = shifted_eta(beta, data, shift).array().exp();
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> Z = data.Z;

  // Decreasing time: risk-set means and hazard increments per group.
  const std::size_t G = idx.groups();
  using acc = long double;
  std::vector<double> increment(G, 0.0);
  std::vector<double> zbar(G * P, 0.0);
  acc s0 = 0.0;
  std::vector<acc> s1(P, 0.0);
  for (std::size_t g = 0; g < G; ++g) {
    double event_weight = 0.0;
    for (Index k = idx.group_start[g]; k < idx.group_start[g + 1]; ++k) {
      const Index i = idx.order[static_cast<std::size_t>(k)];
      const double* z = Z.data() + i * p;
      const acc r = static_cast<acc>(data.w[i]) * rel_risk[i];
      s0 += r;
      for (std::size_t a = 0; a < P; ++a) s1[a] += r * z[a];
      if (data.status[i] == 1) event_weight += data.w[i];
    }
    for (std::size_t a = 0; a < P; ++a) zbar[g * P + a] = static_cast<double>(s1[a] / s0);
    increment[g] = static_cast<double>(event_weight / s0);
  }

  // Increasing time: cumulative sums over event times <= t.
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> U(n, p);
  acc cum_hazard = 0.0;
  std::vector<acc> cum_mean(P, 0.0);
  for (std::size_t g = G; g-- > 0;) {
    cum_hazard += increment[g];
    for (std::size_t a = 0; a < P; ++a) cum_mean[a] += increment[g] * zbar[g * P + a];
    for (Index k = idx.group_start[g]; k < idx.group_start[g + 1]; ++k) {
      const Index i = idx.order[static_cast<std::size_t>(k)];
      const double* z = Z.data() + i * p;
      double* u = U.data() + i * p;
      for (std::size_t a = 0; a < P; ++a) {
        u[a] = static_cast<double>(-rel_risk[i] * (z[a] * cum_hazard - cum_mean[a]));
        if (data.status[i] == 1) u[a] += z[a] - zbar[g * P + a];
      }
    }
  }
  return U;
}

MatrixXd sandwich(const MatrixXd& information_inverse, const MatrixXd& U, const VectorXd& w) {
  const MatrixXd weighted = U.array().colwise() * w.array();
  const MatrixXd meat = weighted.transpose() * weighted;
  return information_inverse * meat * information_inverse;
}

// LDLT's solve pseudo-inverts zero pivots, which leaves rcond() blind to an
// exactly singular matrix, so the pivots are checked directly as well.
bool is_singular(const Eigen::LDLT<MatrixXd>& ldlt) {
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) return true;
  const VectorXd d = ldlt.vectorD();
  if (!(d.minCoeff() > 1e-12 * d.maxCoeff())) return true;
  return !(ldlt.rcond() > 1e-12);
}

}  // namespace

SurvivalSample SurvivalSample::unweighted(VectorXd time, Eigen::VectorXi status, MatrixXd Z) {
  SurvivalSample s{std::move(time), std::move(status), std::move(Z), VectorXd()};
  s.w = VectorXd::Ones(s.time.size());
  return s;
}

void SurvivalSample::validate() const {
  const Index n = time.size();
  if (status.size() != n || Z.rows() != n || w.size() != n) {
    throw std::invalid_argument("SurvivalSample: time, status, Z and w must have the same length");
  }
  if (Z.cols() == 0) throw std::invalid_argument("SurvivalSample: design has no columns");
  for (Index i = 0; i < n; ++i) {
    if (!(time[i] > 0.0) || !std::isfinite(time[i])) {
      throw std::invalid_argument("SurvivalSample: times must be positive and finite");
    }
    if (status[i] != 0 && status[i] != 1) {
      throw std::invalid_argument("SurvivalSample: status must be 0 or 1");
    }
    if (!(w[i] > 0.0) || !std::isfinite(w[i])) {
      throw std::invalid_argument("SurvivalSample: weights must be positive and finite");
    }
  }
  if (!Z.allFinite()) throw std::invalid_argument("SurvivalSample: design must be finite");
}

double partial_loglik(const VectorXd& beta, const SurvivalSample& data) {
  data.validate();
  return evaluate(beta, data, RiskSetIndex(data.time), false).loglik;
}

ScoreInformation score_and_information(const VectorXd& beta, const SurvivalSample& data) {
  data.validate();
  Evaluation e = evaluate(beta, data, RiskSetIndex(data.time), true);
  return {std::move(e.score), std::move(e.information)};
}

MatrixXd score_residuals(const VectorXd& beta, const SurvivalSample& data) {
  data.validate();
  return residuals(beta, data, RiskSetIndex(data.time));
}

CoxFit fit_cox(const SurvivalSample& data, const CoxSettings& settings) {
  data.validate();
  if (data.status.sum() == 0) {
    throw CoxError(CoxError::Kind::NoEvents, "Cox fit: no events in the sample");
  }
  const RiskSetIndex idx(data.time);
  const Index p = data.Z.cols();

  CoxFit fit;
  fit.tied_event_times = count_tied_event_times(data, idx);
  fit.beta = VectorXd::Zero(p);

  Evaluation current = evaluate(fit.beta, data, idx, true);
  fit.loglik_at_zero = current.loglik;
  fit.loglik_trace.push_back(current.loglik);
  Eigen::LDLT<MatrixXd> ldlt(current.information);
  if (is_singular(ldlt)) {
    throw CoxError(CoxError::Kind::SingularInformation,
                   "Cox fit: information matrix is singular (constant or collinear design)");
  }

  for (;;) {
    fit.score_norm = current.score.lpNorm<Eigen::Infinity>();
    if (fit.score_norm <= settings.score_tol) {
      fit.converged = true;
      break;
    }
    if (fit.iterations >= settings.max_iterations) break;

    VectorXd step = ldlt.solve(current.score);
    VectorXd candidate_beta;
    Evaluation candidate;
    bool accepted = false;
    // On large samples the gain promised near the optimum drops below the
    // rounding error of l itself; there a step is judged by the score instead.
    const double flat = 1e-12 * std::max(1.0, std::abs(current.loglik));
    for (int halving = 0; halving <= settings.max_halvings; ++halving) {
      candidate_beta = fit.beta + step;
      candidate = evaluate(candidate_beta, data, idx, true);
      if (std::isfinite(candidate.loglik)) {
        if (candidate.loglik >= current.loglik) {
          accepted = true;
          break;
        }
        const double predicted_gain = 0.5 * current.score.dot(step);
        if (predicted_gain <= flat &&
            candidate.score.lpNorm<Eigen::Infinity>() < current.score.lpNorm<Eigen::Infinity>()) {
          accepted = true;
          break;
        }
      }
      step *= 0.5;
    }
    if (!accepted) break;

    fit.beta = std::move(candidate_beta);
    current = std::move(candidate);
    fit.loglik_trace.push_back(current.loglik);
    ++fit.iterations;

    if (fit.beta.lpNorm<Eigen::Infinity>() > settings.max_abs_beta) {
      throw CoxError(CoxError::Kind::MonotoneLikelihood,
                     "Cox fit: coefficients diverge (monotone likelihood / separation)");
    }
    ldlt.compute(current.information);
    if (is_singular(ldlt)) {
      throw CoxError(CoxError::Kind::SingularInformation,
                     "Cox fit: information matrix became singular during iteration");
    }
  }

  fit.loglik_at_solution = current.loglik;
  fit.information = current.information;
  const MatrixXd inverse = ldlt.solve(MatrixXd::Identity(p, p));
  fit.se_model = inverse.diagonal().cwiseSqrt();
  fit.se_robust = sandwich(inverse, residuals(fit.beta, data, idx), data.w).diagonal().cwiseSqrt();
  return fit;
}

MatrixXd robust_variance(const CoxFit& fit, const SurvivalSample& data) {
  data.validate();
  if (!fit.converged) {
    throw CoxError(CoxError::Kind::NotConverged, "robust variance requested for an unconverged fit");
  }
  const Index p = fit.beta.size();
  if (data.Z.cols() != p) throw std::invalid_argument("robust_variance: design does not match fit");
  const RiskSetIndex idx(data.time);
  const Evaluation e = evaluate(fit.beta, data, idx, true);
  Eigen::LDLT<MatrixXd> ldlt(e.information);
  if (is_singular(ldlt)) {
    throw CoxError(CoxError::Kind::SingularInformation, "robust variance: singular information");
  }
  return sandwich(ldlt.solve(MatrixXd::Identity(p, p)), residuals(fit.beta, data, idx), data.w);
}

}  // namespace itc
