#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string_view>

#include "distq/experiment/config.h"
#include "distq/lq_core.h"
#include "distq/sampling.h"

namespace distq::experiment {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitValidation = 2;
/// Every seed diverged.
inline constexpr int kExitDiverged = 3;
inline constexpr int kExitOracle = 4;
/// Some seeds diverged and others finished.
inline constexpr int kExitPartialDivergence = 5;

inline constexpr int kSummarySchemaVersion = 1;

enum class RunMode { kCentralized, kDistributed, kBoth };

std::string_view to_string(RunMode mode);
RunMode parse_run_mode(std::string_view text);

/// Solves for G*, P and K* and writes oracle.json under `out`.
int cmd_oracle(const ExperimentConfig& cfg, const std::filesystem::path& out);

/// Runs every configured seed and writes, per seed and learner,
/// seed_<s>/<learner>/trace.csv and plots/*.svg, plus summary.json.
int cmd_run(const ExperimentConfig& cfg, RunMode mode, const std::filesystem::path& out);

enum class GainSource {
  /// Run the distributed learner on the first configured seed.
  kRun,
  /// Use G* itself.
  kOracle,
  /// Read the final averaged iterate from a summary.json.
  kSummary,
};

std::string_view to_string(GainSource source);
GainSource parse_gain_source(std::string_view text);

struct ControllerOptions {
  GainSource source = GainSource::kRun;
  std::filesystem::path summary_path;
};

struct ControllerReport {
  double gain_gap = 0.0;
  StabilityReport stability;
  /// Absent when the learned gain is not mean-square stabilizing.
  std::optional<CostEstimate> cost;
  double oracle_value = 0.0;
  bool within_3se = false;
};

/// Compares Gamma(G) against K*, checks mean-square stability of Gamma(G) and,
/// when stable, estimates its closed-loop cost from cfg.x0.
ControllerReport evaluate_controller(const ExperimentConfig& cfg, const OracleSolution& oracle,
                                     const QFactor& G, std::uint64_t seed);

/// Writes controller_report.json under `out`. A non-stabilizing gain is
/// reported, not treated as a failure.
int cmd_validate_controller(const ExperimentConfig& cfg, const ControllerOptions& options,
                            const std::filesystem::path& out);

}  // namespace distq::experiment
