#include "itc/estimands.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "itc/balance.hpp"
#include "itc/harness.hpp"

namespace itc {
namespace {

using Eigen::VectorXd;

OutcomeModelSpec study_a() { return appendix_defaults().study_A.model; }

const std::vector<std::string> kMaximal{"PLNEN", "ISS", "Refr"};

EffectEstimate known(double log_hr, double se, Scale scale = Scale::Marginal) {
  EffectEstimate e;
  e.log_hr = log_hr;
  e.se = se;
  e.scale = scale;
  return e;
}

const TrialData& trial_a() {
  static const TrialData t = [] {
    RandomStream s(61);
    return simulate_trial(study_a(), 100'000, s);
  }();
  return t;
}

TEST(Scale, StringRoundTrip) {
  EXPECT_EQ(to_string(Scale::Marginal), "marginal");
  EXPECT_EQ(to_string(Scale::Conditional), "conditional");
  EXPECT_EQ(scale_from_string("conditional"), Scale::Conditional);
  EXPECT_THROW(scale_from_string("odds"), std::invalid_argument);
}

TEST(MarginalEffect, UnweightedUsesModelStandardError) {
  const TrialData& t = trial_a();
  const EffectEstimate e = marginal_effect(t, std::nullopt, "S1");
  const CoxFit fit = fit_cox(SurvivalSample::unweighted(t.time, t.status, t.trt.cast<double>()));
  EXPECT_EQ(e.log_hr, fit.beta[0]);
  EXPECT_EQ(e.se, fit.se_model[0]);
  EXPECT_EQ(e.scale, Scale::Marginal);
  EXPECT_EQ(e.population, "S1");
  EXPECT_TRUE(e.adjustment_set.empty());
  EXPECT_NEAR(e.hr(), std::exp(e.log_hr), 1e-15);
  EXPECT_NEAR(e.ci95_hi() - e.ci95_lo(), 2 * 1.959964 * e.se, 1e-15);
}

TEST(MarginalEffect, EqualWeightsMatchUnweighted) {
  const TrialData& t = trial_a();
  const EffectEstimate plain = marginal_effect(t);
  const EffectEstimate weighted = marginal_effect(t, VectorXd::Constant(t.size(), 2.5));
  EXPECT_NEAR(weighted.log_hr, plain.log_hr, 1e-10);
  const CoxFit fit = fit_cox(SurvivalSample{t.time, t.status, t.trt.cast<double>(), VectorXd::Ones(t.size())});
  EXPECT_NEAR(weighted.se, fit.se_robust[0], 1e-12);
}

TEST(MarginalEffect, RejectsArmWithoutEvents) {
  TrialData t = trial_a();
  for (Eigen::Index i = 0; i < t.size(); ++i)
    if (t.trt[i] == 1) t.status[i] = 0;
  try {
    marginal_effect(t);
    FAIL() << "expected EstimandError";
  } catch (const EstimandError& e) {
    EXPECT_EQ(e.kind(), EstimandError::Kind::InsufficientEvents);
  }
  EXPECT_THROW(marginal_effect(trial_a(), VectorXd::Ones(3)), std::invalid_argument);
}

TEST(ConditionalEffect, EmptySetIsTheMarginalModel) {
  const TrialData& t = trial_a();
  const EffectEstimate c = conditional_effect(t, {}, "S1");
  const EffectEstimate m = marginal_effect(t, std::nullopt, "S1");
  EXPECT_EQ(c.log_hr, m.log_hr);
  EXPECT_EQ(c.se, m.se);
  EXPECT_EQ(c.scale, Scale::Marginal);
}

TEST(ConditionalEffect, RecoversConditionalTruth) {
  const EffectEstimate c = conditional_effect(trial_a(), kMaximal, "S1");
  EXPECT_EQ(c.scale, Scale::Conditional);
  EXPECT_EQ(c.adjustment_set, kMaximal);
  EXPECT_LE(std::abs(c.log_hr - std::log(0.53)), 4 * c.se);
  EXPECT_THROW(conditional_effect(trial_a(), {"Weight"}), std::out_of_range);
}

// Appendix replication data: seed 555, study A drawn before study B.
TEST(NonCollapsibility, MarginalExceedsConditional) {
  RandomStream s(555);
  const TrialData a = simulate_trial(study_a(), 100'000, s);
  const TrialData b = simulate_trial(appendix_defaults().study_B.model, 100'000, s);
  const EffectEstimate ma = marginal_effect(a), mb = marginal_effect(b);
  const EffectEstimate ca = conditional_effect(a, kMaximal), cb = conditional_effect(b, kMaximal);
  EXPECT_GT(ma.hr(), ca.hr());
  EXPECT_GT(mb.hr(), cb.hr());
  EXPECT_GT(std::abs(hr_ratio(ma, mb) - hr_ratio(ca, cb)), 0.01);
}

TEST(NonCollapsibility, CollapsibleWithoutCovariateEffects) {
  OutcomeModelSpec m = study_a();
  for (auto& c : m.covariates) c.prognostic_coef = c.interaction_coef = 0.0;
  RandomStream s(67);
  const TrialData t = simulate_trial(m, 100'000, s);
  const EffectEstimate marginal = marginal_effect(t), conditional = conditional_effect(t, kMaximal);
  const double combined = std::sqrt(marginal.se * marginal.se + conditional.se * conditional.se);
  EXPECT_LT(std::abs(marginal.log_hr - conditional.log_hr), 3 * combined);
}

TEST(TrueMarginalEffect, RequiresLargeCohort) {
  RandomStream s(63);
  EXPECT_THROW(true_marginal_effect(study_a(), 99'999, s), std::invalid_argument);
}

TEST(TrueMarginalEffect, NoPrognosticCovariatesGivesTreatmentCoefficient) {
  OutcomeModelSpec m = study_a();
  for (auto& c : m.covariates) c.prognostic_coef = 0.0;
  RandomStream s(64), replay(64);
  const double truth = true_marginal_effect(m, 100'000, s);
  const double mc_se = marginal_effect(simulate_trial(m, 100'000, replay)).se;
  EXPECT_LE(std::abs(truth - m.treatment_log_hr), 4 * mc_se);
}

TEST(TrueMarginalEffect, AppendixPopulationsAgree) {
  const ScenarioConfig cfg = appendix_defaults();
  OutcomeModelSpec in_s2 = cfg.study_B.model;
  in_s2.treatment_log_hr = cfg.study_A.model.treatment_log_hr;
  RandomStream s1(65), s2(66);
  const double d1 = true_marginal_effect(cfg.study_A.model, 1'000'000, s1);
  const double d2 = true_marginal_effect(in_s2, 1'000'000, s2);
  EXPECT_NEAR(d1, std::log(0.76), 0.015);
  EXPECT_NEAR(d2, std::log(0.76), 0.015);
}

TEST(Bucher, KnownConditionalTruths) {
  const IndirectComparison r = bucher_compare(known(std::log(0.53), 0), known(std::log(0.55), 0));
  EXPECT_NEAR(std::exp(r.log_hr_AB), 0.53 / 0.55, 1e-15);
  EXPECT_NEAR(std::exp(r.log_hr_AB), 0.964, 5e-4);
  EXPECT_EQ(r.se, 0.0);
}

TEST(Bucher, DifferenceAndVarianceSum) {
  const EffectEstimate ac = known(-0.3, 0.1), bc = known(-0.2, 0.2);
  const IndirectComparison r = bucher_compare(ac, bc);
  EXPECT_EQ(r.log_hr_AB, ac.log_hr - bc.log_hr);
  EXPECT_EQ(r.se * r.se, ac.se * ac.se + bc.se * bc.se);
  EXPECT_NEAR(r.se, 0.223607, 1e-6);
  EXPECT_NEAR(r.ci95_lo, r.log_hr_AB - 1.959964 * r.se, 1e-15);
  EXPECT_NEAR(r.ci95_hi, r.log_hr_AB + 1.959964 * r.se, 1e-15);
  EXPECT_EQ(bucher_compare(ac, ac).log_hr_AB, 0.0);
}

TEST(Bucher, AntiSymmetric) {
  for (double a : {-1.3, -0.2, 0.0, 0.7}) {
    for (double b : {-0.9, 0.1, 2.2}) {
      EXPECT_EQ(bucher_compare(known(a, 0.1), known(b, 0.2)).log_hr_AB,
                -bucher_compare(known(b, 0.2), known(a, 0.1)).log_hr_AB);
    }
  }
}

TEST(Bucher, RejectsMixedScales) {
  const EffectEstimate marginal = known(-0.27, 0.01, Scale::Marginal);
  const EffectEstimate conditional = known(-0.63, 0.01, Scale::Conditional);
  for (const auto& [ac, bc] : {std::pair{marginal, conditional}, std::pair{conditional, marginal}}) {
    try {
      bucher_compare(ac, bc);
      FAIL() << "expected ScaleMismatch";
    } catch (const EstimandError& e) {
      EXPECT_EQ(e.kind(), EstimandError::Kind::ScaleMismatch);
    }
    EXPECT_THROW(hr_ratio(ac, bc), EstimandError);
  }
  EXPECT_NO_THROW(bucher_compare(conditional, conditional));
}

TEST(HrRatio, HandComputed) {
  EXPECT_EQ(hr_ratio(known(-0.4, 0.1), known(-0.4, 0.1)), 1.0);
  EXPECT_NEAR(hr_ratio(known(std::log(0.53), 0, Scale::Conditional), known(std::log(0.55), 0, Scale::Conditional)),
              0.9636, 1e-4);
}

}  // namespace
}  // namespace itc
