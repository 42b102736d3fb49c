#include <CLI11.hpp>

#include <exception>
#include <iostream>

#include "commands.hpp"
#include "itc/harness.hpp"

int main(int argc, char** argv) {
  using namespace itc::cli;

  CLI::App app{"Anchored indirect treatment comparison on simulated survival data"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Simulate both studies and write them as CSV");
  simulate->add_option("--config", sim.config, "JSON scenario config (empty file = defaults)")->required();
  simulate->add_option("--out", sim.out_dir, "Output directory")->required();

  WeightsArgs w;
  auto* weights = app.add_subcommand("weights", "Estimate matching weights for an IPD file");
  weights->add_option("--ipd", w.ipd, "IPD trial CSV")->required();
  weights->add_option("--targets", w.targets, "JSON object mapping covariate name to target mean")->required();
  weights->add_option("--balance-set", w.balance_set, "Covariates to balance")->required()->delimiter(',');
  weights->add_option("--out", w.out, "Write subject_id,weight CSV here");

  FitArgs f;
  auto* fit = app.add_subcommand("fit", "Fit a Cox model and print the treatment effect as JSON");
  fit->add_option("--data", f.data, "Trial CSV")->required();
  fit->add_option("--weights", f.weights, "subject_id,weight CSV (marginal fit only)");
  fit->add_option("--adjust", f.adjust, "Adjustment set for a conditional fit")->delimiter(',');
  fit->add_option("--population", f.population, "Population label recorded in the output");

  ScenarioArgs sc;
  auto* scenario = app.add_subcommand("scenario", "Run one scenario end to end");
  scenario->add_option("--config", sc.config, "JSON scenario config")->required();
  scenario->add_option("--out", sc.out_dir, "Directory for scenario.json and scenario.tsv");

  ReplicateArgs rep;
  auto* replicate = app.add_subcommand("replicate-appendix", "Run Scenarios 1-4 and check the published values");
  replicate->add_option("--seed", rep.seed, "Random seed")->capture_default_str();
  replicate->add_option("--n", rep.n, "Subjects per study")->capture_default_str();
  replicate->add_option("--truth-n", rep.truth_n, "Cohort size for the true marginal effects")->capture_default_str();
  replicate->add_option("--out", rep.out_dir, "Directory for report.json and report.tsv");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*simulate) return run_simulate(sim);
    if (*weights) return run_weights(w);
    if (*fit) return run_fit(f);
    if (*scenario) return run_scenario_command(sc);
    if (*replicate) return run_replicate(rep);
  } catch (const itc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const itc::PipelineError& e) {
    std::cerr << "pipeline error " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
