#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "distq/lq_core.h"
#include "distq/network.h"
#include "distq/qlearning.h"
#include "distq/sampling.h"
#include "distq/trace.h"

namespace distq {

/// Per-sensor Q-factor estimates after k synchronous rounds.
struct SensorBank {
  std::vector<QFactor> G;
  std::size_t k = 0;
};

enum class InitMode {
  /// Every sensor starts at diag(Q, R).
  kCostWeight,
  /// diag(Q, R) plus a seeded symmetric PSD jitter of Frobenius norm 0.1.
  kSpread,
};

inline constexpr double kSpreadMagnitude = 0.1;

std::string_view to_string(InitMode mode);
InitMode parse_init_mode(std::string_view text);

SensorBank initial_bank(const SystemModel& sys, std::size_t N, InitMode mode, std::uint64_t seed);

/// One consensus-plus-innovation round,
///   G_i+ = G_i + w sum_{j in N_i} (G_j - G_i) + alpha(k) L_i Y(G_i),
/// evaluated from the pre-round estimates of every sensor. `realizations`
/// holds either one shared realization or one per sensor.
SensorBank distributed_round(const SensorBank& bank, const ConsensusOperator& cons,
                             const GainAllocation& alloc, const SystemModel& sys,
                             std::span<const Realization> realizations, const Schedule& sched);

struct DistributedOptions {
  bool shared_noise = true;
  std::optional<double> consensus_weight;
  InitMode init = InitMode::kCostWeight;
};

/// Runs `rounds` rounds over `graph`. Shared noise is drawn from `rng`, so a
/// one-sensor run replays run_centralized with the same stream exactly.
RunTrace run_distributed(const SystemModel& sys, const NoiseModel& noise, const Graph& graph,
                         const GainAllocation& alloc, const Schedule& sched, std::size_t rounds,
                         RngStream rng, const OracleSolution* oracle = nullptr,
                         const DistributedOptions& options = {});

struct GapReport {
  /// ||mean_i G_i(k) - G(k)||_F for k = 1..rounds.
  std::vector<double> gap;
  double final_gap = 0.0;
  double max_gap = 0.0;
};

/// Gap between the averaged distributed iterate and the centralized iterate.
/// Throws SeedMismatch unless both traces saw the same shared noise sequence.
GapReport compare_centralized(const RunTrace& trace_d, const RunTrace& trace_c);

}  // namespace distq
