#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace itc::cli {

struct SimulateArgs {
  std::string config;
  std::string out_dir;
};

struct WeightsArgs {
  std::string ipd;
  std::string targets;
  std::vector<std::string> balance_set;
  std::string out;  // weights CSV; empty = not written
};

struct FitArgs {
  std::string data;
  std::string weights;
  std::vector<std::string> adjust;
  std::string population;
};

struct ScenarioArgs {
  std::string config;
  std::string out_dir;
};

struct ReplicateArgs {
  std::uint64_t seed = 555;
  std::int64_t n = 100000;
  std::int64_t truth_n = 1000000;
  std::string out_dir;
};

// Each returns the process exit code.
int run_simulate(const SimulateArgs& args);
int run_weights(const WeightsArgs& args);
int run_fit(const FitArgs& args);
int run_scenario_command(const ScenarioArgs& args);
int run_replicate(const ReplicateArgs& args);

}  // namespace itc::cli
