#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "distq/distributed.h"
#include "distq/lq_core.h"
#include "distq/network.h"
#include "distq/qlearning.h"

namespace distq::experiment {

inline constexpr int kConfigVersion = 1;

/// A fully validated experiment description.
struct ExperimentConfig {
  std::string name;
  SystemModel system;
  NoiseModel noise;
  Schedule schedule;
  std::string graph_descriptor;
  Graph graph;
  GainMode gain_mode = GainMode::kUniform;
  std::optional<double> consensus_weight;
  std::size_t rounds = 200;
  std::vector<std::uint64_t> seeds{0};
  bool shared_noise = true;
  InitMode init = InitMode::kCostWeight;
  std::string output_dir = "out";

  double oracle_tol = kDefaultOracleTol;
  std::size_t oracle_max_iter = kDefaultOracleMaxIter;

  /// Controller validation: initial state and Monte Carlo budget.
  Eigen::VectorXd x0;
  std::size_t mc_horizon = 400;
  std::size_t mc_runs = 2000;

  DistributedOptions distributed_options() const;
};

/// Parses and validates a JSON config. `source` names the input in error
/// messages. Throws ParseError for malformed documents or mistyped fields and
/// ValidationError listing every violated precondition.
ExperimentConfig parse_config(std::string_view text, std::string_view source = "<config>");

ExperimentConfig load_config(const std::filesystem::path& path);

/// Built-in presets: paper_sec4, deterministic_plant, scalar_deterministic,
/// zero_dynamics, single_sensor.
std::vector<std::string> preset_names();
std::string_view preset_text(std::string_view name);
ExperimentConfig load_preset(std::string_view name);

/// Parses "20" as seeds 0..19 and "3,5,8" as that list.
std::vector<std::uint64_t> parse_seed_list(std::string_view text);

}  // namespace distq::experiment
