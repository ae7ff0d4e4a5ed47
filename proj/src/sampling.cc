#include "distq/sampling.h"

#include <cmath>
#include <numbers>

#include "distq/errors.h"
#include "distq/parallel.h"

namespace distq {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed),
      stream_id_(stream_id),
      engine_(splitmix64(seed ^ splitmix64(stream_id))) {}

RngStream RngStream::derive(std::uint64_t index) const {
  return RngStream(seed_, splitmix64(stream_id_ ^ splitmix64(~index)));
}

double RngStream::uniform() {
  // 53 random mantissa bits, shifted into (0, 1].
  return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;
}

double RngStream::standard_normal() {
  if (has_cached_) {
    has_cached_ = false;
    return cached_normal_;
  }
  const double radius = std::sqrt(-2.0 * std::log(uniform()));
  const double angle = 2.0 * std::numbers::pi * uniform();
  cached_normal_ = radius * std::sin(angle);
  has_cached_ = true;
  return radius * std::cos(angle);
}

double draw_noise(RngStream& rng, const NoiseModel& noise) {
  const double z = rng.standard_normal();
  if (noise.sigma2 == 0.0) return noise.mu;
  return noise.mu + std::sqrt(noise.sigma2) * z;
}

Realization realize(const SystemModel& sys, double omega) {
  return Realization{sys.A + sys.A_bar * omega, sys.B + sys.B_bar * omega, omega};
}

double Trajectory::total_cost() const {
  double total = 0.0;
  for (double c : stage_cost) total += c;
  return total;
}

Trajectory simulate_trajectory(const SystemModel& sys, const NoiseModel& noise, const Gain& K,
                               const Eigen::VectorXd& x0, std::size_t horizon, RngStream& rng) {
  if (horizon < 1) throw BadSpec("horizon must be >= 1");
  if (x0.size() != sys.n()) throw BadSpec("initial state has wrong dimension");
  Trajectory traj;
  traj.x.reserve(horizon + 1);
  traj.u.reserve(horizon);
  traj.stage_cost.reserve(horizon);
  traj.x.push_back(x0);
  for (std::size_t k = 0; k < horizon; ++k) {
    const Eigen::VectorXd& x = traj.x.back();
    Eigen::VectorXd u = K.K * x;
    traj.stage_cost.push_back(x.dot(sys.Q * x) + u.dot(sys.R * u));
    const Realization real = realize(sys, draw_noise(rng, noise));
    Eigen::VectorXd next = real.A_k * x + real.B_k * u;
    traj.u.push_back(std::move(u));
    const double norm = next.norm();
    traj.x.push_back(std::move(next));
    if (!(norm <= kStateOverflow)) {
      traj.overflow = true;
      break;
    }
  }
  return traj;
}

CostEstimate monte_carlo_cost(const SystemModel& sys, const NoiseModel& noise, const Gain& K,
                              const Eigen::VectorXd& x0, std::size_t horizon, std::size_t n_runs,
                              const RngStream& rng) {
  if (n_runs < 2) throw BadSpec("Monte Carlo cost needs at least two runs");
  std::vector<double> costs(n_runs, 0.0);
  std::vector<std::size_t> overflow_step(n_runs, 0);
  parallel_for(n_runs, [&](std::size_t r) {
    RngStream stream = rng.derive(r);
    const Trajectory traj = simulate_trajectory(sys, noise, K, x0, horizon, stream);
    costs[r] = traj.total_cost();
    if (traj.overflow) overflow_step[r] = traj.u.size();
  });
  for (std::size_t r = 0; r < n_runs; ++r) {
    if (overflow_step[r] != 0) throw Diverged(overflow_step[r], kStateOverflow);
  }

  // Welford, in run order.
  double mean = 0.0;
  double m2 = 0.0;
  for (std::size_t r = 0; r < n_runs; ++r) {
    const double delta = costs[r] - mean;
    mean += delta / static_cast<double>(r + 1);
    m2 += delta * (costs[r] - mean);
  }
  const double variance = m2 / static_cast<double>(n_runs - 1);
  return CostEstimate{mean, std::sqrt(variance / static_cast<double>(n_runs)), n_runs};
}

}  // namespace distq
