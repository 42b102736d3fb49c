#include "commands.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include "itc/harness.hpp"

namespace itc::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out.precision(17);
  return out;
}

TrialData load_trial(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  try {
    return read_trial_csv(in);
  } catch (const std::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

// subject_id,weight with ids 1..n in data order.
Eigen::VectorXd load_weights(const std::string& path, Eigen::Index n) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || line != "subject_id,weight") {
    throw std::runtime_error(path + ": expected header 'subject_id,weight'");
  }
  Eigen::VectorXd w(n);
  Eigen::Index i = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw std::runtime_error(path + ": malformed line " + std::to_string(i + 2));
    if (i >= n) throw std::runtime_error(path + ": more weights than subjects");
    if (std::stoll(line.substr(0, comma)) != i + 1) {
      throw std::runtime_error(path + ": subject ids must run 1..n in data order");
    }
    w[i++] = std::stod(line.substr(comma + 1));
  }
  if (i != n) throw std::runtime_error(path + ": " + std::to_string(i) + " weights for " + std::to_string(n) + " subjects");
  return w;
}

void write_weights(std::ostream& out, const Eigen::VectorXd& w) {
  out << "subject_id,weight\n";
  for (Eigen::Index i = 0; i < w.size(); ++i) out << i + 1 << ',' << w[i] << '\n';
}

void warn_ties(const EffectEstimate& e) {
  if (e.tied_event_times > 0) {
    std::cerr << "warning: " << e.tied_event_times
              << " tied event time(s); the Breslow approximation is used\n";
  }
}

}  // namespace

int run_simulate(const SimulateArgs& args) {
  const ScenarioConfig cfg = parse_config(read_file(args.config));
  RandomStream stream = seed_stream(cfg.seed);
  const TrialData a = simulate_trial(effective_model(cfg, cfg.study_A), cfg.n, stream);
  const TrialData b = simulate_trial(effective_model(cfg, cfg.study_B), cfg.n, stream);

  const fs::path dir(args.out_dir);
  auto out_a = open_output(dir / "study_A.csv");
  write_trial_csv(out_a, a);
  auto out_b = open_output(dir / "study_B.csv");
  write_trial_csv(out_b, b);

  const AggregateSummary ald = summarize_aggregate(b);
  json targets = json::object();
  for (std::size_t k = 0; k < ald.covariate_names.size(); ++k) {
    targets[ald.covariate_names[k]] = ald.mean[static_cast<Eigen::Index>(k)];
  }
  open_output(dir / "targets_B.json") << targets.dump(2) << '\n';
  std::cout << "wrote " << (dir / "study_A.csv").string() << ", " << (dir / "study_B.csv").string() << ", "
            << (dir / "targets_B.json").string() << '\n';
  return 0;
}

int run_weights(const WeightsArgs& args) {
  const TrialData ipd = load_trial(args.ipd);
  const json targets = json::parse(read_file(args.targets));
  if (!targets.is_object()) throw std::runtime_error(args.targets + ": expected a JSON object of name -> mean");

  const auto K = static_cast<Eigen::Index>(args.balance_set.size());
  Eigen::MatrixXd X(ipd.size(), K);
  Eigen::VectorXd t(K);
  for (Eigen::Index k = 0; k < K; ++k) {
    const std::string& name = args.balance_set[static_cast<std::size_t>(k)];
    X.col(k) = ipd.X.col(ipd.column(name));
    if (!targets.contains(name) || !targets.at(name).is_number()) {
      throw std::runtime_error(args.targets + ": no numeric target for '" + name + "'");
    }
    t[k] = targets.at(name).get<double>();
  }
  const MaicWeights w = estimate_weights(center_covariates(X, t, args.balance_set));
  if (!w.converged) throw std::runtime_error("weight estimation did not converge");

  std::cout.precision(10);
  write_balance_tsv(std::cout, balance_report(X, args.balance_set, w.w, t));
  if (!args.out.empty()) {
    auto out = open_output(args.out);
    write_weights(out, w.w);
  }
  return 0;
}

int run_fit(const FitArgs& args) {
  const TrialData data = load_trial(args.data);
  EffectEstimate e;
  if (!args.adjust.empty()) {
    if (!args.weights.empty()) throw std::runtime_error("--weights and --adjust cannot be combined");
    e = conditional_effect(data, args.adjust, args.population);
  } else if (!args.weights.empty()) {
    e = marginal_effect(data, load_weights(args.weights, data.size()), args.population);
  } else {
    e = marginal_effect(data, std::nullopt, args.population);
  }
  warn_ties(e);
  std::cout << to_json(e).dump(2) << '\n';
  return 0;
}

int run_scenario_command(const ScenarioArgs& args) {
  const ScenarioConfig cfg = parse_config(read_file(args.config));
  const ScenarioResult r = run_scenario(cfg);
  for (const EffectEstimate* e : {&r.marginal_AC_S1, &r.conditional_AC_S1, &r.conditional_BC_S2, &r.maic_AC_S2}) {
    warn_ties(*e);
  }
  write_scenario_tsv(std::cout, r);
  const std::string dir = args.out_dir.empty() ? cfg.output_dir : args.out_dir;
  if (!dir.empty()) {
    open_output(fs::path(dir) / "scenario.json") << to_json(r).dump(2) << '\n';
    auto tsv = open_output(fs::path(dir) / "scenario.tsv");
    write_scenario_tsv(tsv, r);
  }
  return 0;
}

int run_replicate(const ReplicateArgs& args) {
  const AppendixReport report = replicate_appendix({args.seed, args.n, args.truth_n});
  write_report_tsv(std::cout, report);
  if (!args.out_dir.empty()) {
    open_output(fs::path(args.out_dir) / "report.json") << to_json(report).dump(2) << '\n';
    auto tsv = open_output(fs::path(args.out_dir) / "report.tsv");
    write_report_tsv(tsv, report);
  }
  return report.all_pass() ? 0 : 1;
}

}  // namespace itc::cli
