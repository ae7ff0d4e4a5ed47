#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "distq/lq_core.h"

namespace distq {

/// Cap on ||G||_F shared by the centralized and distributed learners.
inline constexpr double kDivergenceCap = 1e9;

struct SensorRecord {
  double omega = 0.0;
  /// Entrywise 1-norm sum_ij |G_ij|.
  double norm1 = 0.0;
  double fro_norm = 0.0;
  std::optional<double> err_to_oracle;
};

/// State of the run after iteration k (k counts from 1).
struct RoundRecord {
  std::size_t k = 0;
  double alpha = 0.0;
  std::vector<SensorRecord> sensors;
  /// max_{i,j} ||G_i - G_j||_F; absent for the centralized learner.
  std::optional<double> consensus_diameter;
  /// (1/N) sum_i G_i, or G itself for the centralized learner.
  Eigen::MatrixXd mean_iterate;
  std::optional<double> mean_err_to_oracle;
};

struct RunTrace {
  bool distributed = false;
  bool shared_noise = true;
  std::uint64_t seed = 0;
  std::vector<RoundRecord> rounds;
  std::vector<QFactor> final_estimates;

  std::size_t sensor_count() const { return final_estimates.size(); }
  /// Largest ||G_i(k)||_F seen in the run.
  double max_fro_norm() const;
  QFactor mean_final() const;
};

double entrywise_norm1(const Eigen::MatrixXd& M);
double consensus_diameter(std::span<const QFactor> estimates);
Eigen::MatrixXd mean_of(std::span<const QFactor> estimates);

/// Builds the record for one completed round from the post-round estimates.
RoundRecord make_round_record(std::size_t k, double alpha, std::span<const double> omegas,
                              std::span<const QFactor> estimates, bool distributed,
                              const QFactor* oracle_G);

}  // namespace distq
