#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "distq/lq_core.h"

namespace distq {

/// Identifier of the only generator family currently supported: a
/// std::mt19937_64 engine keyed by (seed, stream_id) through SplitMix64, with
/// normals produced by the Box-Muller transform. Both pieces are fully
/// specified, so draw sequences do not depend on the standard library.
inline constexpr const char* kRngFamily = "mt19937_64-boxmuller";

/// Fixed stream ids, one per experiment component.
namespace streams {
inline constexpr std::uint64_t kNoise = 1;
inline constexpr std::uint64_t kSpread = 2;
inline constexpr std::uint64_t kMonteCarlo = 3;
/// Sensor i >= 1 draws from kSensorNoise + i in independent-noise mode;
/// sensor 0 shares kNoise so a one-sensor network replays the centralized run.
inline constexpr std::uint64_t kSensorNoise = 1000;
}  // namespace streams

std::uint64_t splitmix64(std::uint64_t x);

class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  /// Independent child stream, e.g. one per Monte Carlo run.
  RngStream derive(std::uint64_t index) const;

  /// Uniform on (0, 1].
  double uniform();
  double standard_normal();

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
  double cached_normal_ = 0.0;
  bool has_cached_ = false;
};

/// One draw of w ~ N(mu, sigma2). Returns exactly mu when sigma2 == 0.
double draw_noise(RngStream& rng, const NoiseModel& noise);

/// A(k) = A + A_bar w, B(k) = B + B_bar w.
struct Realization {
  Eigen::MatrixXd A_k;
  Eigen::MatrixXd B_k;
  double omega = 0.0;
};

Realization realize(const SystemModel& sys, double omega);

inline constexpr double kStateOverflow = 1e12;

/// States x(0..T), inputs u(0..T-1) and stage costs for a horizon T. When the
/// state norm exceeds kStateOverflow the trajectory stops early with
/// `overflow` set.
struct Trajectory {
  std::vector<Eigen::VectorXd> x;
  std::vector<Eigen::VectorXd> u;
  std::vector<double> stage_cost;
  bool overflow = false;

  double total_cost() const;
};

Trajectory simulate_trajectory(const SystemModel& sys, const NoiseModel& noise, const Gain& K,
                               const Eigen::VectorXd& x0, std::size_t horizon, RngStream& rng);

struct CostEstimate {
  double mean = 0.0;
  double std_err = 0.0;
  std::size_t n_runs = 0;
};

/// Monte Carlo estimate of the truncated-horizon closed-loop cost. Run r uses
/// the private stream rng.derive(r); runs execute in parallel and are reduced
/// in run order. Throws Diverged if any run overflows.
CostEstimate monte_carlo_cost(const SystemModel& sys, const NoiseModel& noise, const Gain& K,
                              const Eigen::VectorXd& x0, std::size_t horizon, std::size_t n_runs,
                              const RngStream& rng);

}  // namespace distq
