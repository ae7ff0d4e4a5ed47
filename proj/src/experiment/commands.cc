#include "distq/experiment/commands.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "distq/distributed.h"
#include "distq/errors.h"
#include "distq/experiment/output.h"
#include "distq/network.h"
#include "distq/parallel.h"
#include "distq/qlearning.h"

namespace distq::experiment {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

json to_json(const Eigen::MatrixXd& M) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < M.cols(); ++c) row.push_back(M(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& value, const std::string& what) {
  if (!value.is_array() || value.empty() || !value.front().is_array()) {
    throw ParseError(what + ": expected a nested list of rows");
  }
  const auto rows = static_cast<Eigen::Index>(value.size());
  const auto cols = static_cast<Eigen::Index>(value.front().size());
  Eigen::MatrixXd M(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const json& row = value[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw ParseError(what + ": rows must be lists of equal length");
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      const json& x = row[static_cast<std::size_t>(c)];
      if (!x.is_number()) throw ParseError(what + ": expected numbers");
      M(r, c) = x.get<double>();
    }
  }
  return M;
}

void write_json(const fs::path& path, const json& doc) {
  write_text_file(path, doc.dump(2) + "\n");
}

std::optional<OracleSolution> solve_or_report(const ExperimentConfig& cfg) {
  try {
    return solve_oracle(cfg.system, cfg.noise, cfg.oracle_tol, cfg.oracle_max_iter);
  } catch (const NoConvergence& e) {
    spdlog::error("oracle did not converge: {}", e.what());
  } catch (const NotStabilizing& e) {
    spdlog::error("oracle gain is not mean-square stabilizing: {}", e.what());
  } catch (const SingularInnerMatrix& e) {
    spdlog::error("oracle failed: {}", e.what());
  }
  return std::nullopt;
}

struct LearnerOutcome {
  std::optional<RunTrace> trace;
  std::size_t diverged_round = 0;
  double divergence_norm = 0.0;

  bool diverged() const { return !trace.has_value(); }
};

LearnerOutcome run_learner(const ExperimentConfig& cfg, const OracleSolution& oracle,
                           std::uint64_t seed, bool distributed) {
  const RngStream rng(seed, streams::kNoise);
  LearnerOutcome outcome;
  try {
    if (distributed) {
      const GainAllocation alloc =
          allocate_gains(cfg.graph, cfg.system.n(), cfg.system.m(), cfg.gain_mode);
      outcome.trace = run_distributed(cfg.system, cfg.noise, cfg.graph, alloc, cfg.schedule,
                                      cfg.rounds, rng, &oracle, cfg.distributed_options());
    } else {
      outcome.trace =
          run_centralized(cfg.system, cfg.noise, cfg.schedule, cfg.rounds, rng, &oracle);
    }
  } catch (const Diverged& e) {
    spdlog::warn("seed {}: {} learner diverged at round {} (norm {:.3g})", seed,
                 distributed ? "distributed" : "centralized", e.round(), e.norm());
    outcome.diverged_round = e.round();
    outcome.divergence_norm = e.norm();
  }
  return outcome;
}

json learner_summary(const LearnerOutcome& outcome) {
  json j;
  if (outcome.diverged()) {
    j["status"] = "diverged";
    j["diverged_round"] = outcome.diverged_round;
    j["divergence_norm"] = outcome.divergence_norm;
    return j;
  }
  const RunTrace& trace = *outcome.trace;
  const RoundRecord& last = trace.rounds.back();
  j["status"] = "ok";
  j["rounds"] = last.k;
  j["final_err_to_Gstar"] = last.mean_err_to_oracle.value_or(0.0);
  double worst = 0.0;
  for (const auto& s : last.sensors) worst = std::max(worst, s.err_to_oracle.value_or(0.0));
  j["final_max_sensor_err_to_Gstar"] = worst;
  if (last.consensus_diameter) j["final_consensus_diameter"] = *last.consensus_diameter;
  j["max_fro_norm"] = trace.max_fro_norm();
  j["final_G"] = to_json(trace.mean_final().matrix());
  return j;
}

double median(std::vector<double> values) {
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  return 0.5 * (upper + *std::max_element(values.begin(), values.begin() +
                                                               static_cast<std::ptrdiff_t>(mid)));
}

}  // namespace

std::string_view to_string(RunMode mode) {
  switch (mode) {
    case RunMode::kCentralized: return "centralized";
    case RunMode::kDistributed: return "distributed";
    case RunMode::kBoth: return "both";
  }
  return "unknown";
}

RunMode parse_run_mode(std::string_view text) {
  if (text == "centralized") return RunMode::kCentralized;
  if (text == "distributed") return RunMode::kDistributed;
  if (text == "both") return RunMode::kBoth;
  throw BadSpec("unknown run mode '" + std::string(text) +
                "' (expected centralized, distributed or both)");
}

std::string_view to_string(GainSource source) {
  switch (source) {
    case GainSource::kRun: return "run";
    case GainSource::kOracle: return "oracle";
    case GainSource::kSummary: return "summary";
  }
  return "unknown";
}

GainSource parse_gain_source(std::string_view text) {
  if (text == "run") return GainSource::kRun;
  if (text == "oracle") return GainSource::kOracle;
  if (text == "summary") return GainSource::kSummary;
  throw BadSpec("unknown gain source '" + std::string(text) +
                "' (expected run, oracle or summary)");
}

int cmd_oracle(const ExperimentConfig& cfg, const fs::path& out) {
  const auto oracle = solve_or_report(cfg);
  if (!oracle) return kExitOracle;
  json doc;
  doc["schema_version"] = kSummarySchemaVersion;
  doc["name"] = cfg.name;
  doc["G_star"] = to_json(oracle->G_star.matrix());
  doc["P"] = to_json(oracle->P);
  doc["K_star"] = to_json(oracle->K_star.K);
  doc["residual"] = oracle->residual;
  doc["riccati_residual"] = riccati_residual(oracle->P, cfg.system, cfg.noise);
  doc["spectral_radius"] = oracle->spectral_radius;
  doc["stable"] = oracle->spectral_radius < 1.0;
  doc["iterations"] = oracle->iterations;
  write_json(out / "oracle.json", doc);
  spdlog::info("oracle converged in {} iterations, residual {:.3g}, spectral radius {:.6f}",
               oracle->iterations, oracle->residual, oracle->spectral_radius);
  return kExitOk;
}

int cmd_run(const ExperimentConfig& cfg, RunMode mode, const fs::path& out) {
  const auto oracle = solve_or_report(cfg);
  if (!oracle) return kExitOracle;
  const bool run_c = mode != RunMode::kDistributed;
  const bool run_d = mode != RunMode::kCentralized;

  struct SeedResult {
    LearnerOutcome centralized;
    LearnerOutcome distributed;
  };
  std::vector<SeedResult> results(cfg.seeds.size());
  parallel_for(cfg.seeds.size(), [&](std::size_t idx) {
    const std::uint64_t seed = cfg.seeds[idx];
    const fs::path dir = out / fmt::format("seed_{}", seed);
    if (run_c) {
      results[idx].centralized = run_learner(cfg, *oracle, seed, false);
      if (const auto& t = results[idx].centralized.trace) {
        write_run_artifacts(dir / "centralized", *t, fmt::format("centralized, seed {}", seed));
      }
    }
    if (run_d) {
      results[idx].distributed = run_learner(cfg, *oracle, seed, true);
      if (const auto& t = results[idx].distributed.trace) {
        write_run_artifacts(dir / "distributed", *t, fmt::format("distributed, seed {}", seed));
      }
    }
  });

  json doc;
  doc["schema_version"] = kSummarySchemaVersion;
  doc["name"] = cfg.name;
  doc["mode"] = std::string(to_string(mode));
  doc["rounds"] = cfg.rounds;
  doc["graph"] = cfg.graph_descriptor;
  doc["sensors"] = cfg.graph.N;
  doc["gain_mode"] = std::string(to_string(cfg.gain_mode));
  doc["shared_noise"] = cfg.shared_noise;
  doc["init"] = std::string(to_string(cfg.init));
  doc["oracle"] = {{"residual", oracle->residual},
                   {"spectral_radius", oracle->spectral_radius},
                   {"G_star", to_json(oracle->G_star.matrix())}};

  std::size_t diverged_seeds = 0;
  std::vector<double> c_err, d_err, d_diam, gaps;
  json per_seed = json::array();
  for (std::size_t idx = 0; idx < results.size(); ++idx) {
    const auto& r = results[idx];
    json entry;
    entry["seed"] = cfg.seeds[idx];
    bool diverged = false;
    if (run_c) {
      entry["centralized"] = learner_summary(r.centralized);
      diverged |= r.centralized.diverged();
      if (!r.centralized.diverged()) {
        c_err.push_back(entry["centralized"]["final_err_to_Gstar"].get<double>());
      }
    }
    if (run_d) {
      entry["distributed"] = learner_summary(r.distributed);
      diverged |= r.distributed.diverged();
      if (!r.distributed.diverged()) {
        d_err.push_back(entry["distributed"]["final_err_to_Gstar"].get<double>());
        d_diam.push_back(entry["distributed"]["final_consensus_diameter"].get<double>());
      }
    }
    if (run_c && run_d && cfg.shared_noise && !diverged) {
      const GapReport gap = compare_centralized(*r.distributed.trace, *r.centralized.trace);
      entry["gap"] = {{"final", gap.final_gap}, {"max", gap.max_gap}};
      gaps.push_back(gap.final_gap);
    }
    if (diverged) ++diverged_seeds;
    per_seed.push_back(std::move(entry));
  }
  doc["seeds"] = std::move(per_seed);

  json medians = json::object();
  if (!c_err.empty()) medians["centralized_final_err_to_Gstar"] = median(c_err);
  if (!d_err.empty()) medians["distributed_final_err_to_Gstar"] = median(d_err);
  if (!d_diam.empty()) medians["distributed_final_consensus_diameter"] = median(d_diam);
  if (!gaps.empty()) medians["final_gap"] = median(gaps);
  doc["medians"] = std::move(medians);
  doc["diverged_seeds"] = diverged_seeds;
  write_json(out / "summary.json", doc);

  if (diverged_seeds == 0) {
    spdlog::info("{} seed(s) finished without divergence", cfg.seeds.size());
    return kExitOk;
  }
  spdlog::warn("{} of {} seed(s) diverged", diverged_seeds, cfg.seeds.size());
  return diverged_seeds == cfg.seeds.size() ? kExitDiverged : kExitPartialDivergence;
}

ControllerReport evaluate_controller(const ExperimentConfig& cfg, const OracleSolution& oracle,
                                     const QFactor& G, std::uint64_t seed) {
  ControllerReport report;
  const Gain K = gamma_map(G);
  report.gain_gap = (K.K - oracle.K_star.K).norm();
  report.stability = ms_stability_check(K, cfg.system, cfg.noise);
  report.oracle_value = cfg.x0.dot(oracle.P * cfg.x0);
  if (report.stability.stable) {
    try {
      report.cost = monte_carlo_cost(cfg.system, cfg.noise, K, cfg.x0, cfg.mc_horizon,
                                     cfg.mc_runs, RngStream(seed, streams::kMonteCarlo));
      report.within_3se =
          std::abs(report.cost->mean - report.oracle_value) <= 3.0 * report.cost->std_err;
    } catch (const Diverged& e) {
      spdlog::warn("closed-loop simulation overflowed: {}", e.what());
    }
  }
  return report;
}

int cmd_validate_controller(const ExperimentConfig& cfg, const ControllerOptions& options,
                            const fs::path& out) {
  const auto oracle = solve_or_report(cfg);
  if (!oracle) return kExitOracle;
  const std::uint64_t seed = cfg.seeds.front();

  QFactor G = oracle->G_star;
  switch (options.source) {
    case GainSource::kOracle:
      break;
    case GainSource::kRun: {
      const LearnerOutcome outcome = run_learner(cfg, *oracle, seed, true);
      if (outcome.diverged()) return kExitDiverged;
      G = outcome.trace->mean_final();
      break;
    }
    case GainSource::kSummary: {
      std::ifstream in(options.summary_path);
      if (!in) throw ParseError("cannot open summary '" + options.summary_path.string() + "'");
      json summary;
      try {
        summary = json::parse(in);
      } catch (const json::parse_error& e) {
        throw ParseError(options.summary_path.string() + ": " + e.what());
      }
      const json* entry = nullptr;
      if (summary.contains("seeds") && summary["seeds"].is_array() && !summary["seeds"].empty()) {
        const json& first = summary["seeds"].front();
        for (const char* learner : {"distributed", "centralized"}) {
          if (first.contains(learner) && first[learner].contains("final_G")) {
            entry = &first[learner]["final_G"];
            break;
          }
        }
      }
      if (entry == nullptr) {
        throw ParseError(options.summary_path.string() + ": no final_G for the first seed");
      }
      const Eigen::MatrixXd M = matrix_from_json(*entry, options.summary_path.string());
      const auto dim = cfg.system.n() + cfg.system.m();
      if (M.rows() != dim || M.cols() != dim) {
        throw ParseError(options.summary_path.string() + ": final_G has the wrong shape");
      }
      G = QFactor(M, cfg.system.n());
      break;
    }
  }

  const ControllerReport report = evaluate_controller(cfg, *oracle, G, seed);
  const Gain K = gamma_map(G);
  json doc;
  doc["schema_version"] = kSummarySchemaVersion;
  doc["name"] = cfg.name;
  doc["gain_source"] = std::string(to_string(options.source));
  doc["seed"] = seed;
  doc["K"] = to_json(K.K);
  doc["K_star"] = to_json(oracle->K_star.K);
  doc["gain_gap"] = report.gain_gap;
  doc["spectral_radius"] = report.stability.spectral_radius;
  doc["stable"] = report.stability.stable;
  doc["status"] = report.stability.stable ? "stabilizing" : "not_stabilizing";
  doc["x0"] = std::vector<double>(cfg.x0.data(), cfg.x0.data() + cfg.x0.size());
  doc["horizon"] = cfg.mc_horizon;
  doc["oracle_value"] = report.oracle_value;
  if (report.cost) {
    doc["cost"] = {{"mean", report.cost->mean},
                   {"std_err", report.cost->std_err},
                   {"n_runs", report.cost->n_runs}};
    doc["within_3se"] = report.within_3se;
  } else {
    doc["cost"] = nullptr;
    doc["within_3se"] = false;
  }
  write_json(out / "controller_report.json", doc);
  if (!report.stability.stable) {
    spdlog::warn("learned gain is not mean-square stabilizing (spectral radius {:.6f})",
                 report.stability.spectral_radius);
  }
  spdlog::info("gain gap {:.3g}, spectral radius {:.6f}", report.gain_gap,
               report.stability.spectral_radius);
  return kExitOk;
}

}  // namespace distq::experiment
