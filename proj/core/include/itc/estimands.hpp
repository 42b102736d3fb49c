#pragma once

// Marginal and conditional treatment effects on the log hazard ratio scale,
// and the anchored (Bucher) indirect comparison.
//
// Every estimate carries its scale. Combining a marginal with a conditional
// estimate is rejected: for a non-collapsible measure such as the hazard
// ratio the two are different quantities even without confounding.

#include <Eigen/Core>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "itc/cohortsim.hpp"
#include "itc/coxph.hpp"

namespace itc {

enum class Scale { Marginal, Conditional };

std::string to_string(Scale scale);
Scale scale_from_string(const std::string& s);

/// Two-sided 95% normal quantile.
inline constexpr double kZ975 = 1.959964;

struct EffectEstimate {
  double log_hr = 0.0;
  double se = 0.0;  // zero only for known (true) values
  Scale scale = Scale::Marginal;
  std::string population;
  std::vector<std::string> adjustment_set;
  Eigen::Index tied_event_times = 0;  // Breslow handles ties, but callers may want to warn

  double hr() const;
  double ci95_lo() const { return log_hr - kZ975 * se; }
  double ci95_hi() const { return log_hr + kZ975 * se; }
};

struct IndirectComparison {
  double log_hr_AB = 0.0;
  double se = 0.0;
  double ci95_lo = 0.0;
  double ci95_hi = 0.0;
  EffectEstimate ac;
  EffectEstimate bc;
};

class EstimandError : public std::runtime_error {
 public:
  enum class Kind { ScaleMismatch, InsufficientEvents };

  EstimandError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// Univariable (optionally weighted) Cox regression of outcome on treatment.
/// Weighted fits report the robust standard error, unweighted fits the
/// model-based one.
EffectEstimate marginal_effect(const TrialData& trial,
                               const std::optional<Eigen::VectorXd>& weights = std::nullopt,
                               std::string population = {}, const CoxSettings& settings = {});

/// Treatment coefficient of a Cox model adjusted for the named covariates.
/// An empty adjustment set is the univariable model and is reported on the
/// marginal scale.
EffectEstimate conditional_effect(const TrialData& trial,
                                  const std::vector<std::string>& adjustment_set,
                                  std::string population = {}, const CoxSettings& settings = {});

/// Simulation-based truth: univariable Cox coefficient on a cohort of
/// n_large subjects drawn from `model` (n_large >= 100000).
double true_marginal_effect(const OutcomeModelSpec& model, Eigen::Index n_large,
                            RandomStream& stream);

IndirectComparison bucher_compare(const EffectEstimate& ac, const EffectEstimate& bc);

/// exp(log_hr_AC - log_hr_BC).
double hr_ratio(const EffectEstimate& ac, const EffectEstimate& bc);

}  // namespace itc
