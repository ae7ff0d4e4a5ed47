#pragma once

#include <cstddef>
#include <optional>

#include <Eigen/Dense>

#include "distq/lq_core.h"
#include "distq/sampling.h"
#include "distq/trace.h"

namespace distq {

/// Power-law step size alpha(k) = scale * (1 / (k + offset))^exponent.
///
/// With 0.5 < exponent <= 1 the sequence satisfies sum alpha = inf and
/// sum alpha^2 < inf. scale = 0 gives the degenerate alpha == 0 schedule,
/// which is useful for isolating the consensus dynamics.
struct Schedule {
  double exponent = 0.6;
  std::size_t offset = 2;
  double scale = 1.0;

  double alpha(std::size_t k) const;
  /// Throws BadSpec unless 0.5 < exponent <= 1, offset >= 1, 0 <= scale <= 1.
  void validate() const;
};

struct LearnerState {
  QFactor G;
  std::size_t k = 0;
};

/// Sampled residual [[Q + Ak' Pi(G) Ak, Ak' Pi(G) Bk], [Bk' Pi(G) Ak,
/// Bk' Pi(G) Bk + R]] - G, symmetrized.
Eigen::MatrixXd y_operator(const QFactor& G, const Realization& real, const Eigen::MatrixXd& Q,
                           const Eigen::MatrixXd& R);

/// G <- G + alpha(k) Y(G); k <- k + 1. Throws Diverged if the new iterate
/// exceeds kDivergenceCap in Frobenius norm.
LearnerState centralized_step(const LearnerState& state, const Realization& real,
                              const Schedule& sched, const SystemModel& sys);

/// Runs `iters` centralized steps, one noise draw per step from `rng`.
/// Starts from diag(Q, R) unless `init` is given. When `oracle` is supplied
/// the trace carries ||G(k) - G*||_F.
RunTrace run_centralized(const SystemModel& sys, const NoiseModel& noise, const Schedule& sched,
                         std::size_t iters, RngStream rng, const OracleSolution* oracle = nullptr,
                         const std::optional<QFactor>& init = std::nullopt);

}  // namespace distq
