#include "itc/harness.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

namespace itc {
namespace {

std::string config_error_path(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.path();
  }
  ADD_FAILURE() << "expected ConfigError for " << text;
  return {};
}

const AppendixReport& appendix_report() {
  static const AppendixReport report = replicate_appendix();
  return report;
}

const ReportRow& row(const AppendixReport& r, const std::string& quantity) {
  for (const auto& x : r.rows)
    if (x.quantity == quantity) return x;
  throw std::out_of_range("no report row " + quantity);
}

double combined_se(const EffectEstimate& a, const EffectEstimate& b) {
  return std::sqrt(a.se * a.se + b.se * b.se);
}

TEST(ParseConfig, EmptyDocumentGivesAppendixDefaults) {
  const ScenarioConfig d = appendix_defaults();
  EXPECT_EQ(parse_config(""), d);
  EXPECT_EQ(parse_config("{}"), d);
  EXPECT_EQ(d.seed, 555u);
  EXPECT_EQ(d.n, 100'000);
  EXPECT_EQ(d.balance_set, (std::vector<std::string>{"PLNEN", "ISS", "Refr"}));
  EXPECT_NEAR(d.study_A.model.treatment_log_hr, std::log(0.53), 1e-15);
  EXPECT_NEAR(d.study_B.model.treatment_log_hr, std::log(0.55), 1e-15);
  EXPECT_FALSE(d.interaction.has_value());
}

TEST(ParseConfig, OverridesMergeOntoDefaults) {
  const ScenarioConfig c = parse_config(R"({"seed": 7, "n": 1000, "balance_set": ["Age"],
      "study_B": {"censoring_rate": 0}, "interaction": {"covariate": "Age", "coef": 0.005}})");
  EXPECT_EQ(c.seed, 7u);
  EXPECT_EQ(c.n, 1000);
  EXPECT_EQ(c.balance_set, std::vector<std::string>{"Age"});
  EXPECT_EQ(c.study_B.model.censoring_rate, 0.0);
  EXPECT_EQ(c.study_B.model.covariates, appendix_defaults().study_B.model.covariates);
  ASSERT_TRUE(c.interaction.has_value());
  EXPECT_EQ(c.interaction->coef, 0.005);
}

TEST(ParseConfig, ErrorsNameTheField) {
  EXPECT_EQ(config_error_path(R"({"balance_set": ["PLNEN", "Weight"]})"), "balance_set[1]");
  EXPECT_EQ(config_error_path(R"({"colour": 1})"), "colour");
  EXPECT_EQ(config_error_path(R"({"study_A": {"covariates": [{"name": "x", "distribution": {"kind": "poisson"}}]}})"),
            "study_A.covariates[0].distribution.lambda");
  EXPECT_EQ(config_error_path(R"({"study_A": {"covariates": [{"name": "x", "distribution": {"kind": "gamma"}}]}})"),
            "study_A.covariates[0].distribution.kind");
  EXPECT_EQ(config_error_path(R"({"n": 3})"), "n");
  EXPECT_EQ(config_error_path(R"({"interaction": {"covariate": "Weight", "coef": 1}})"), "interaction.covariate");
  EXPECT_EQ(config_error_path(R"({"seed": -1})"), "seed");
  EXPECT_EQ(config_error_path("{not json"), "<root>");
}

TEST(ParseConfig, RoundTripIsIdempotent) {
  const std::string text = R"({"name": "s3", "seed": 9, "balance_set": ["PLNEN", "ISS", "Refr", "Age"],
      "interaction": {"covariate": "Age", "coef": 0.005}, "outputs": {"dir": "out"}})";
  const ScenarioConfig once = parse_config(text);
  const nlohmann::json normalized = config_to_json(once);
  EXPECT_EQ(parse_config(normalized), once);
  EXPECT_EQ(config_to_json(parse_config(normalized.dump())), normalized);
}

TEST(EffectiveModel, InteractionAppliedToBothStudies) {
  ScenarioConfig c = appendix_defaults();
  c.interaction = InteractionSpec{"Age", 0.005};
  for (const StudySpec* s : {&c.study_A, &c.study_B}) {
    const OutcomeModelSpec m = effective_model(c, *s);
    for (const auto& cov : m.covariates) EXPECT_EQ(cov.interaction_coef, cov.name == "Age" ? 0.005 : 0.0);
  }
}

TEST(RunScenario, DeterministicGivenSeed) {
  ScenarioConfig c = appendix_defaults();
  c.n = 20'000;
  const ScenarioResult a = run_scenario(c), b = run_scenario(c);
  EXPECT_EQ(a.maic_AC_S2.log_hr, b.maic_AC_S2.log_hr);
  EXPECT_EQ(a.maic_AC_S2.se, b.maic_AC_S2.se);
  EXPECT_EQ(a.weights.w, b.weights.w);
  EXPECT_EQ(to_json(a).dump(), to_json(b).dump());
}

TEST(RunScenario, ResultIsInternallyConsistent) {
  ScenarioConfig c = appendix_defaults();
  c.n = 20'000;
  const ScenarioResult r = run_scenario(c);
  EXPECT_EQ(r.maic_AC_S2.scale, Scale::Marginal);
  EXPECT_EQ(r.conditional_AC_S1.scale, Scale::Conditional);
  EXPECT_DOUBLE_EQ(r.hr_ratio_marginal, hr_ratio(r.maic_AC_S2, r.marginal_BC_S2));
  EXPECT_DOUBLE_EQ(r.hr_ratio_conditional, hr_ratio(r.conditional_AC_S1, r.conditional_BC_S2));
  EXPECT_EQ(r.bucher.log_hr_AB, r.maic_AC_S2.log_hr - r.marginal_BC_S2.log_hr);
  EXPECT_EQ(r.ess, r.weights.ess);
  EXPECT_LT(r.ess, static_cast<double>(r.n));
  EXPECT_LT(r.balance.max_gap(), 1e-6);
}

TEST(RunScenario, NoCensoringCompletes) {
  ScenarioConfig c = appendix_defaults();
  c.n = 20'000;
  c.study_A.model.censoring_rate = 0.0;
  c.study_B.model.censoring_rate = 0.0;
  EXPECT_NO_THROW(run_scenario(c));
  RandomStream s(c.seed);
  EXPECT_EQ(simulate_trial(c.study_A.model, c.n, s).status.sum(), c.n);
}

TEST(RunScenario, FailuresCarryTheirStage) {
  ScenarioConfig c = appendix_defaults();
  c.n = 2'000;
  c.study_A.model.covariates[2].marginal = DistributionSpec::bernoulli(0.0);  // ISS never present in IPD
  try {
    run_scenario(c);
    FAIL() << "expected PipelineError";
  } catch (const PipelineError& e) {
    EXPECT_EQ(e.stage(), "weight");
  }
  c = appendix_defaults();
  c.balance_set = {"Weight"};
  try {
    run_scenario(c);
    FAIL() << "expected PipelineError";
  } catch (const PipelineError& e) {
    EXPECT_EQ(e.stage(), "validate");
  }
}

TEST(ReplicateAppendix, EffectiveSampleSizeOrdering) {
  const AppendixReport& r = appendix_report();
  ASSERT_EQ(r.scenarios.size(), 4u);
  const double ess1 = r.scenarios[0].ess, ess2 = r.scenarios[1].ess, ess4 = r.scenarios[3].ess;
  EXPECT_GE(ess2, ess1);
  EXPECT_GE(ess1, ess4);
  EXPECT_GE(ess1, r.scenarios[2].ess);
}

TEST(ReplicateAppendix, NoBiasWithoutEffectModification) {
  const AppendixReport& r = appendix_report();
  for (std::size_t k : {0u, 1u}) {
    const ScenarioResult& s = r.scenarios[k];
    EXPECT_LT(std::abs(s.maic_AC_S2.log_hr - s.marginal_AC_S1.log_hr), 3 * combined_se(s.maic_AC_S2, s.marginal_AC_S1))
        << s.name;
  }
}

// Large-cohort marginal A-vs-C effect with its standard error.
EffectEstimate population_effect(OutcomeModelSpec model, double treatment_log_hr, std::uint64_t seed) {
  model.treatment_log_hr = treatment_log_hr;
  RandomStream s(seed);
  return marginal_effect(simulate_trial(model, 1'000'000, s));
}

TEST(EffectModification, ContrastAcrossPopulations) {
  ScenarioConfig sc3 = appendix_defaults();
  sc3.interaction = InteractionSpec{"Age", 0.005};
  const double b_A = sc3.study_A.model.treatment_log_hr;

  // With Age modifying the effect, the two populations have different
  // marginal effects, by far more than the simulation error.
  const EffectEstimate s1 = population_effect(effective_model(sc3, sc3.study_A), b_A, 71);
  const EffectEstimate s2 = population_effect(effective_model(sc3, sc3.study_B), b_A, 72);
  EXPECT_GT(std::abs(s1.log_hr - s2.log_hr), 5 * combined_se(s1, s2));

  // The Scenario 3 and 4 MAIC estimates target the S2 effect.
  const AppendixReport& r = appendix_report();
  for (std::size_t k : {2u, 3u}) {
    const EffectEstimate& maic = r.scenarios[k].maic_AC_S2;
    EXPECT_LT(std::abs(maic.log_hr - s2.log_hr), 3 * combined_se(maic, s2)) << r.scenarios[k].name;
  }

  // Without the interaction there is nothing to separate them.
  const ScenarioConfig base = appendix_defaults();
  const EffectEstimate t1 = population_effect(base.study_A.model, b_A, 73);
  const EffectEstimate& maic1 = r.scenarios[0].maic_AC_S2;
  EXPECT_LT(std::abs(maic1.log_hr - t1.log_hr), 5 * combined_se(maic1, t1));
}

TEST(ReplicateAppendix, ReportRowsAreSelfConsistent) {
  const AppendixReport& r = appendix_report();
  EXPECT_EQ(r.seed, 555u);
  bool all = true;
  for (const auto& x : r.rows) {
    EXPECT_EQ(x.pass, x.tol.admits(x.ours)) << x.quantity;
    all = all && x.pass;
  }
  EXPECT_EQ(r.all_pass(), all);
  EXPECT_EQ(row(r, "maic_hr_AC_S2_scenario1").ours, r.scenarios[0].maic_AC_S2.hr());

  const nlohmann::json j = to_json(r);
  ASSERT_EQ(j.at("rows").size(), r.rows.size());
  for (const auto& x : j.at("rows")) {
    for (const char* key : {"quantity", "ours", "paper", "tol", "pass"}) EXPECT_TRUE(x.contains(key)) << key;
  }
  const nlohmann::json e = to_json(r.scenarios[0].maic_AC_S2);
  for (const char* key : {"log_hr", "hr", "se", "ci95_lo", "ci95_hi", "scale", "population"}) {
    EXPECT_TRUE(e.contains(key)) << key;
  }
}

TEST(ReplicateAppendix, SameSeedGivesIdenticalReports) {
  const ReplicationSettings s{555, 20'000, 100'000};
  const AppendixReport a = replicate_appendix(s), b = replicate_appendix(s);
  std::ostringstream ta, tb;
  write_report_tsv(ta, a);
  write_report_tsv(tb, b);
  EXPECT_EQ(ta.str(), tb.str());
  EXPECT_EQ(to_json(a).dump(2), to_json(b).dump(2));
}

TEST(Tolerance, Admits) {
  EXPECT_TRUE((Tolerance{0.5, 1.0}).admits(0.5));
  EXPECT_TRUE((Tolerance{0.5, 1.0}).admits(1.0));
  EXPECT_FALSE((Tolerance{0.5, 1.0}).admits(1.0000001));
  EXPECT_TRUE((Tolerance{std::nullopt, 1e-6}).admits(-3.0));
  EXPECT_FALSE((Tolerance{0.0, std::nullopt}).admits(-1e-300));
  EXPECT_FALSE((Tolerance{0.0, 1.0}).admits(std::nan("")));
}

}  // namespace
}  // namespace itc
