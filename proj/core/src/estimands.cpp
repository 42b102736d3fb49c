#include "itc/estimands.hpp"

#include <cmath>

namespace itc {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

std::string to_string(Scale scale) {
  return scale == Scale::Marginal ? "marginal" : "conditional";
}

Scale scale_from_string(const std::string& s) {
  if (s == "marginal") return Scale::Marginal;
  if (s == "conditional") return Scale::Conditional;
  throw std::invalid_argument("unknown effect scale '" + s + "'");
}

double EffectEstimate::hr() const { return std::exp(log_hr); }

namespace {

void require_events_per_arm(const TrialData& trial) {
  int treated = 0;
  int control = 0;
  for (Index i = 0; i < trial.size(); ++i) {
    if (trial.status[i] != 1) continue;
    (trial.trt[i] == 1 ? treated : control) += 1;
  }
  if (treated == 0 || control == 0) {
    throw EstimandError(EstimandError::Kind::InsufficientEvents,
                        "treatment effect needs at least one event in each arm");
  }
}

CoxFit fit_or_throw(const SurvivalSample& sample, const CoxSettings& settings) {
  CoxFit fit = fit_cox(sample, settings);
  if (!fit.converged) {
    throw CoxError(CoxError::Kind::NotConverged,
                   "Cox fit did not converge (score norm " + std::to_string(fit.score_norm) + ")");
  }
  return fit;
}

void require_same_scale(const EffectEstimate& ac, const EffectEstimate& bc) {
  if (ac.scale != bc.scale) {
    throw EstimandError(EstimandError::Kind::ScaleMismatch,
                        "cannot combine a " + to_string(ac.scale) + " estimate (" + ac.population +
                            ") with a " + to_string(bc.scale) + " estimate (" + bc.population +
                            "): hazard ratios are non-collapsible");
  }
}

}  // namespace

EffectEstimate marginal_effect(const TrialData& trial, const std::optional<VectorXd>& weights,
                               std::string population, const CoxSettings& settings) {
  trial.validate();
  require_events_per_arm(trial);
  SurvivalSample sample = SurvivalSample::unweighted(trial.time, trial.status,
                                                     MatrixXd(trial.trt.cast<double>()));
  if (weights) {
    if (weights->size() != trial.size()) {
      throw std::invalid_argument("marginal_effect: weight vector length mismatch");
    }
    sample.w = *weights;
  }
  const CoxFit fit = fit_or_throw(sample, settings);
  EffectEstimate e;
  e.log_hr = fit.beta[0];
  e.se = weights ? fit.se_robust[0] : fit.se_model[0];
  e.scale = Scale::Marginal;
  e.population = std::move(population);
  e.tied_event_times = fit.tied_event_times;
  return e;
}

EffectEstimate conditional_effect(const TrialData& trial,
                                  const std::vector<std::string>& adjustment_set,
                                  std::string population, const CoxSettings& settings) {
  if (adjustment_set.empty()) return marginal_effect(trial, std::nullopt, std::move(population), settings);
  trial.validate();
  require_events_per_arm(trial);
  MatrixXd Z(trial.size(), static_cast<Index>(adjustment_set.size()) + 1);
  Z.col(0) = trial.trt.cast<double>();
  for (std::size_t k = 0; k < adjustment_set.size(); ++k) {
    Z.col(static_cast<Index>(k) + 1) = trial.X.col(trial.column(adjustment_set[k]));
  }
  const CoxFit fit = fit_or_throw(SurvivalSample::unweighted(trial.time, trial.status, std::move(Z)),
                                  settings);
  EffectEstimate e;
  e.log_hr = fit.beta[0];
  e.se = fit.se_model[0];
  e.scale = Scale::Conditional;
  e.population = std::move(population);
  e.adjustment_set = adjustment_set;
  e.tied_event_times = fit.tied_event_times;
  return e;
}

double true_marginal_effect(const OutcomeModelSpec& model, Index n_large, RandomStream& stream) {
  if (n_large < 100000) {
    throw std::invalid_argument("true_marginal_effect: n_large must be at least 100000");
  }
  const Index n = n_large + (n_large % 2);
  return marginal_effect(simulate_trial(model, n, stream)).log_hr;
}

IndirectComparison bucher_compare(const EffectEstimate& ac, const EffectEstimate& bc) {
  require_same_scale(ac, bc);
  IndirectComparison c;
  c.log_hr_AB = ac.log_hr - bc.log_hr;
  c.se = std::sqrt(ac.se * ac.se + bc.se * bc.se);
  c.ci95_lo = c.log_hr_AB - kZ975 * c.se;
  c.ci95_hi = c.log_hr_AB + kZ975 * c.se;
  c.ac = ac;
  c.bc = bc;
  return c;
}

double hr_ratio(const EffectEstimate& ac, const EffectEstimate& bc) {
  require_same_scale(ac, bc);
  return std::exp(ac.log_hr - bc.log_hr);
}

}  // namespace itc
