#include "distq/qlearning.h"

#include <cmath>

#include "distq/errors.h"

namespace distq {

double Schedule::alpha(std::size_t k) const {
  return scale * std::pow(1.0 / static_cast<double>(k + offset), exponent);
}

void Schedule::validate() const {
  if (!(exponent > 0.5 && exponent <= 1.0)) {
    throw BadSpec("schedule exponent must lie in (0.5, 1]");
  }
  if (offset < 1) throw BadSpec("schedule offset must be >= 1");
  if (!(scale >= 0.0 && scale <= 1.0)) throw BadSpec("schedule scale must lie in [0, 1]");
}

Eigen::MatrixXd y_operator(const QFactor& G, const Realization& real, const Eigen::MatrixXd& Q,
                           const Eigen::MatrixXd& R) {
  const int n = G.n();
  const int m = G.m();
  const Eigen::MatrixXd P = pi_map(G);
  const Eigen::MatrixXd PA = P * real.A_k;
  const Eigen::MatrixXd PB = P * real.B_k;
  Eigen::MatrixXd Y(n + m, n + m);
  Y.topLeftCorner(n, n) = Q + real.A_k.transpose() * PA;
  Y.topRightCorner(n, m) = real.A_k.transpose() * PB;
  Y.bottomLeftCorner(m, n) = real.B_k.transpose() * PA;
  Y.bottomRightCorner(m, m) = real.B_k.transpose() * PB + R;
  Y -= G.matrix();
  return 0.5 * (Y + Y.transpose());
}

LearnerState centralized_step(const LearnerState& state, const Realization& real,
                              const Schedule& sched, const SystemModel& sys) {
  LearnerState next{state.G, state.k + 1};
  next.G.matrix() += sched.alpha(state.k) * y_operator(state.G, real, sys.Q, sys.R);
  next.G.symmetrize();
  const double norm = next.G.matrix().norm();
  if (!(norm <= kDivergenceCap)) throw Diverged(next.k, norm);
  return next;
}

RunTrace run_centralized(const SystemModel& sys, const NoiseModel& noise, const Schedule& sched,
                         std::size_t iters, RngStream rng, const OracleSolution* oracle,
                         const std::optional<QFactor>& init) {
  if (iters < 1) throw BadSpec("iteration count must be >= 1");
  RunTrace trace;
  trace.distributed = false;
  trace.shared_noise = true;
  trace.seed = rng.seed();
  trace.rounds.reserve(iters);

  LearnerState state{init.value_or(QFactor::cost_weight(sys)), 0};
  const QFactor* oracle_G = oracle != nullptr ? &oracle->G_star : nullptr;
  for (std::size_t it = 0; it < iters; ++it) {
    const double alpha = sched.alpha(state.k);
    const double omega = draw_noise(rng, noise);
    state = centralized_step(state, realize(sys, omega), sched, sys);
    trace.rounds.push_back(make_round_record(state.k, alpha, std::span(&omega, 1),
                                             std::span(&state.G, 1), false, oracle_G));
  }
  trace.final_estimates = {state.G};
  return trace;
}

}  // namespace distq
