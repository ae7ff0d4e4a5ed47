#include "distq/distributed.h"

#include <algorithm>

#include "distq/errors.h"

namespace distq {

std::string_view to_string(InitMode mode) {
  return mode == InitMode::kCostWeight ? "diag" : "spread";
}

InitMode parse_init_mode(std::string_view text) {
  if (text == "diag") return InitMode::kCostWeight;
  if (text == "spread") return InitMode::kSpread;
  throw BadSpec("unknown initialization mode '" + std::string(text) + "'");
}

SensorBank initial_bank(const SystemModel& sys, std::size_t N, InitMode mode, std::uint64_t seed) {
  const QFactor base = QFactor::cost_weight(sys);
  SensorBank bank{std::vector<QFactor>(N, base), 0};
  if (mode == InitMode::kSpread) {
    const RngStream root(seed, streams::kSpread);
    const auto dim = base.dim();
    for (std::size_t i = 0; i < N; ++i) {
      RngStream rng = root.derive(i);
      Eigen::MatrixXd M(dim, dim);
      for (Eigen::Index c = 0; c < dim; ++c) {
        for (Eigen::Index r = 0; r < dim; ++r) M(r, c) = rng.standard_normal();
      }
      Eigen::MatrixXd jitter = M * M.transpose();
      jitter *= kSpreadMagnitude / jitter.norm();
      bank.G[i].matrix() += jitter;
      bank.G[i].symmetrize();
    }
  }
  return bank;
}

SensorBank distributed_round(const SensorBank& bank, const ConsensusOperator& cons,
                             const GainAllocation& alloc, const SystemModel& sys,
                             std::span<const Realization> realizations, const Schedule& sched) {
  const std::size_t N = bank.G.size();
  if (cons.laplacian.rows() != static_cast<Eigen::Index>(N) || alloc.N != N) {
    throw BadSpec("sensor bank, consensus operator and gain allocation disagree on N");
  }
  if (realizations.size() != 1 && realizations.size() != N) {
    throw BadSpec("need one shared realization or one per sensor");
  }
  const double alpha = sched.alpha(bank.k);

  SensorBank next{bank.G, bank.k + 1};
  for (std::size_t i = 0; i < N; ++i) {
    const QFactor& Gi = bank.G[i];
    Eigen::MatrixXd& out = next.G[i].matrix();
    const auto row = static_cast<Eigen::Index>(i);
    Eigen::MatrixXd disagreement = Eigen::MatrixXd::Zero(Gi.dim(), Gi.dim());
    bool has_neighbor = false;
    for (std::size_t j = 0; j < N; ++j) {
      if (j == i || cons.laplacian(row, static_cast<Eigen::Index>(j)) == 0.0) continue;
      disagreement += bank.G[j].matrix() - Gi.matrix();
      has_neighbor = true;
    }
    if (has_neighbor) out += cons.weight * disagreement;
    const Realization& real = realizations.size() == 1 ? realizations[0] : realizations[i];
    out += alpha * alloc.apply(i, y_operator(Gi, real, sys.Q, sys.R));
    next.G[i].symmetrize();
    const double norm = out.norm();
    if (!(norm <= kDivergenceCap)) throw Diverged(next.k, norm);
  }
  return next;
}

RunTrace run_distributed(const SystemModel& sys, const NoiseModel& noise, const Graph& graph,
                         const GainAllocation& alloc, const Schedule& sched, std::size_t rounds,
                         RngStream rng, const OracleSolution* oracle,
                         const DistributedOptions& options) {
  if (rounds < 1) throw BadSpec("round count must be >= 1");
  const ConsensusOperator cons = consensus_operator(graph, options.consensus_weight);
  const std::size_t N = graph.N;

  RunTrace trace;
  trace.distributed = true;
  trace.shared_noise = options.shared_noise;
  trace.seed = rng.seed();
  trace.rounds.reserve(rounds);

  std::vector<RngStream> sensor_streams;
  if (!options.shared_noise) {
    sensor_streams.push_back(rng);
    for (std::size_t i = 1; i < N; ++i) {
      sensor_streams.emplace_back(rng.seed(), streams::kSensorNoise + i);
    }
  }

  SensorBank bank = initial_bank(sys, N, options.init, rng.seed());
  const QFactor* oracle_G = oracle != nullptr ? &oracle->G_star : nullptr;
  std::vector<Realization> realizations;
  std::vector<double> omegas;
  for (std::size_t r = 0; r < rounds; ++r) {
    // All draws for the round happen before any sensor updates.
    realizations.clear();
    omegas.clear();
    if (options.shared_noise) {
      omegas.push_back(draw_noise(rng, noise));
    } else {
      for (auto& stream : sensor_streams) omegas.push_back(draw_noise(stream, noise));
    }
    for (double w : omegas) realizations.push_back(realize(sys, w));

    const double alpha = sched.alpha(bank.k);
    bank = distributed_round(bank, cons, alloc, sys, realizations, sched);
    trace.rounds.push_back(make_round_record(bank.k, alpha, omegas, bank.G, true, oracle_G));
  }
  trace.final_estimates = bank.G;
  return trace;
}

GapReport compare_centralized(const RunTrace& trace_d, const RunTrace& trace_c) {
  if (!trace_d.shared_noise || trace_d.seed != trace_c.seed ||
      trace_d.rounds.size() != trace_c.rounds.size()) {
    throw SeedMismatch("traces were not produced from the same shared noise sequence");
  }
  GapReport report;
  report.gap.reserve(trace_d.rounds.size());
  for (std::size_t r = 0; r < trace_d.rounds.size(); ++r) {
    const auto& d = trace_d.rounds[r];
    const auto& c = trace_c.rounds[r];
    if (d.sensors.front().omega != c.sensors.front().omega) {
      throw SeedMismatch("noise sequences differ at round " + std::to_string(d.k));
    }
    const double gap = (d.mean_iterate - c.mean_iterate).norm();
    report.gap.push_back(gap);
    report.max_gap = std::max(report.max_gap, gap);
  }
  if (!report.gap.empty()) report.final_gap = report.gap.back();
  return report;
}

}  // namespace distq
