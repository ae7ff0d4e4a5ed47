#include "distq/distributed.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "distq/errors.h"
#include "test_support.h"

namespace distq {
namespace {

using testing::benchmark_noise;
using testing::benchmark_system;
using testing::matrices_near;

const Schedule kNoStep{0.6, 2, 0.0};

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const auto mid = v.size() / 2;
  return v.size() % 2 == 1 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

TEST(DistributedRound, ConsensusAtFixedPointIsStationary) {
  const SystemModel sys = testing::deterministic_system();
  const auto sol = solve_oracle(sys, NoiseModel{});
  const Graph g = build_graph("ring:4");
  const SensorBank bank{std::vector<QFactor>(4, sol.G_star), 0};
  const Realization real = realize(sys, 0.9);
  const auto next = distributed_round(bank, consensus_operator(g), allocate_gains(g, 2, 1, GainMode::kUniform),
                                      sys, std::span(&real, 1), Schedule{});
  for (const auto& G : next.G) EXPECT_TRUE(matrices_near(G.matrix(), sol.G_star.matrix(), 1e-12));
  EXPECT_EQ(next.k, 1u);
}

TEST(DistributedRound, TwoNodeHalfWeightAverages) {
  const SystemModel sys = benchmark_system();
  const Graph g = build_graph("complete:2");
  std::mt19937_64 gen(5);
  const QFactor G1(testing::random_spd(gen, 3), 2);
  const QFactor G2(testing::random_spd(gen, 3), 2);
  const Realization real = realize(sys, 1.0);
  const auto next = distributed_round(SensorBank{{G1, G2}, 0}, consensus_operator(g, 0.5),
                                      allocate_gains(g, 2, 1, GainMode::kUniform), sys,
                                      std::span(&real, 1), kNoStep);
  const Eigen::MatrixXd avg = 0.5 * (G1.matrix() + G2.matrix());
  EXPECT_TRUE(matrices_near(next.G[0].matrix(), avg, 1e-15));
  EXPECT_TRUE(matrices_near(next.G[1].matrix(), avg, 1e-15));
}

TEST(DistributedRound, FirstRoundReplay) {
  // All sensors start equal, so the consensus term vanishes and each sensor
  // takes exactly the centralized first step.
  const SystemModel sys = benchmark_system();
  const Graph g = build_graph("ring:4");
  const auto alloc = allocate_gains(g, 2, 1, GainMode::kUniform);
  const auto d = run_distributed(sys, benchmark_noise(), g, alloc, Schedule{}, 1,
                                 RngStream(0, streams::kNoise));
  const auto c = run_centralized(sys, benchmark_noise(), Schedule{}, 1, RngStream(0, streams::kNoise));
  for (const auto& G : d.final_estimates) {
    EXPECT_TRUE(matrices_near(G.matrix(), c.final_estimates[0].matrix(), 0.0));
  }
  EXPECT_EQ(*d.rounds[0].consensus_diameter, 0.0);
}

TEST(DistributedRound, RejectsInconsistentInputs) {
  const SystemModel sys = benchmark_system();
  const Graph g4 = build_graph("ring:4");
  const Graph g3 = build_graph("ring:3");
  const SensorBank bank = initial_bank(sys, 4, InitMode::kCostWeight, 0);
  const Realization real = realize(sys, 1.0);
  EXPECT_THROW(distributed_round(bank, consensus_operator(g3), allocate_gains(g4, 2, 1, GainMode::kUniform),
                                 sys, std::span(&real, 1), Schedule{}),
               BadSpec);
  const std::vector<Realization> two{real, real};
  EXPECT_THROW(distributed_round(bank, consensus_operator(g4), allocate_gains(g4, 2, 1, GainMode::kUniform),
                                 sys, two, Schedule{}),
               BadSpec);
}

TEST(DistributedRound, AveragePreservedWithoutInnovation) {
  const SystemModel sys = benchmark_system();
  const Graph g = build_graph("edges:1-2,2-3,3-4,4-5,2-5");
  const auto cons = consensus_operator(g);
  const auto alloc = allocate_gains(g, 2, 1, GainMode::kMasked);
  SensorBank bank = initial_bank(sys, g.N, InitMode::kSpread, 12);
  const Realization real = realize(sys, 1.0);
  const Eigen::MatrixXd avg0 = mean_of(bank.G);
  double prev_diameter = consensus_diameter(bank.G);
  for (int r = 0; r < 30; ++r) {
    bank = distributed_round(bank, cons, alloc, sys, std::span(&real, 1), kNoStep);
    EXPECT_TRUE(matrices_near(mean_of(bank.G), avg0, 1e-12));
    const double diameter = consensus_diameter(bank.G);
    EXPECT_LE(diameter, prev_diameter * (1.0 + 1e-12));
    prev_diameter = diameter;
  }
}

TEST(DistributedRound, UniformGainsAverageFollowsMeanInnovation) {
  const SystemModel sys = benchmark_system();
  const Graph g = build_graph("ring:4");
  const auto cons = consensus_operator(g);
  const auto alloc = allocate_gains(g, 2, 1, GainMode::kUniform);
  const SensorBank bank = initial_bank(sys, 4, InitMode::kSpread, 3);
  const Realization real = realize(sys, 1.3);
  const Schedule sched;
  const auto next = distributed_round(bank, cons, alloc, sys, std::span(&real, 1), sched);
  Eigen::MatrixXd mean_y = Eigen::MatrixXd::Zero(3, 3);
  for (const auto& G : bank.G) mean_y += y_operator(G, real, sys.Q, sys.R) / 4.0;
  EXPECT_TRUE(matrices_near(mean_of(next.G), mean_of(bank.G) + sched.alpha(0) * mean_y, 1e-12));
}

TEST(DistributedRound, EqualEstimatesTakeCentralizedStep) {
  const SystemModel sys = benchmark_system();
  const Graph g = build_graph("star:4");
  std::mt19937_64 gen(9);
  const QFactor G(testing::random_spd(gen, 3), 2);
  const Realization real = realize(sys, 0.7);
  const auto next = distributed_round(SensorBank{std::vector<QFactor>(4, G), 6}, consensus_operator(g),
                                      allocate_gains(g, 2, 1, GainMode::kUniform), sys,
                                      std::span(&real, 1), Schedule{});
  const auto central = centralized_step(LearnerState{G, 6}, real, Schedule{}, sys);
  EXPECT_TRUE(matrices_near(mean_of(next.G), central.G.matrix(), 1e-12));
}

TEST(RunDistributed, SingleSensorReplaysCentralizedRun) {
  const SystemModel sys = benchmark_system();
  const auto sol = solve_oracle(sys, benchmark_noise());
  const Graph g = build_graph("single");
  const auto alloc = allocate_gains(g, 2, 1, GainMode::kUniform);
  const auto c = run_centralized(sys, benchmark_noise(), Schedule{}, 200, RngStream(7, streams::kNoise), &sol);
  for (bool shared : {true, false}) {
    const auto d = run_distributed(sys, benchmark_noise(), g, alloc, Schedule{}, 200,
                                   RngStream(7, streams::kNoise), &sol,
                                   DistributedOptions{.shared_noise = shared});
    ASSERT_EQ(d.rounds.size(), c.rounds.size());
    for (std::size_t r = 0; r < c.rounds.size(); ++r) {
      const auto& sd = d.rounds[r].sensors[0];
      const auto& sc = c.rounds[r].sensors[0];
      ASSERT_EQ(sd.omega, sc.omega);
      ASSERT_EQ(sd.norm1, sc.norm1);
      ASSERT_EQ(*sd.err_to_oracle, *sc.err_to_oracle);
      ASSERT_EQ(d.rounds[r].alpha, c.rounds[r].alpha);
    }
    EXPECT_TRUE(matrices_near(d.final_estimates[0].matrix(), c.final_estimates[0].matrix(), 0.0));
  }
}

TEST(RunDistributed, IndependentNoiseGivesEachSensorItsOwnDraws) {
  const SystemModel sys = benchmark_system();
  const Graph g = build_graph("ring:4");
  const auto d = run_distributed(sys, benchmark_noise(), g, allocate_gains(g, 2, 1, GainMode::kUniform),
                                 Schedule{}, 5, RngStream(1, streams::kNoise), nullptr,
                                 DistributedOptions{.shared_noise = false});
  const auto& s = d.rounds[0].sensors;
  EXPECT_NE(s[0].omega, s[1].omega);
  EXPECT_NE(s[1].omega, s[2].omega);
  EXPECT_GT(*d.rounds[0].consensus_diameter, 0.0);
}

TEST(RunDistributed, BenchmarkConsensusDiameterShrinks) {
  const SystemModel sys = benchmark_system();
  const Graph g = build_graph("ring:4");
  const auto alloc = allocate_gains(g, 2, 1, GainMode::kUniform);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto d = run_distributed(sys, benchmark_noise(), g, alloc, Schedule{}, 200,
                                   RngStream(seed, streams::kNoise), nullptr,
                                   DistributedOptions{.shared_noise = true, .init = InitMode::kSpread});
    EXPECT_LT(*d.rounds[199].consensus_diameter, *d.rounds[9].consensus_diameter) << seed;
    for (const auto& G : d.final_estimates) EXPECT_TRUE(G.is_symmetric());
  }
}

TEST(RunDistributed, MaskedGainsStillConvergeAndAgree) {
  const SystemModel sys = benchmark_system();
  const auto sol = solve_oracle(sys, benchmark_noise());
  const Graph g = build_graph("ring:4");
  const auto alloc = allocate_gains(g, 2, 1, GainMode::kMasked);
  // N alpha(k) must stay <= 1 for a sensor's own coordinates not to overshoot.
  const Schedule sched{0.6, 2, 1.0 / 4.0};
  std::vector<double> err10, err_end, diam10, diam_end;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto d = run_distributed(sys, benchmark_noise(), g, alloc, sched, 1000,
                                   RngStream(seed, streams::kNoise), &sol);
    err10.push_back(*d.rounds[9].mean_err_to_oracle);
    err_end.push_back(*d.rounds.back().mean_err_to_oracle);
    diam10.push_back(*d.rounds[9].consensus_diameter);
    diam_end.push_back(*d.rounds.back().consensus_diameter);
  }
  EXPECT_LT(median(err_end), median(err10));
  EXPECT_LT(median(diam_end), median(diam10));
}

TEST(RunDistributed, DeterministicPlantConvergesForEverySensor) {
  const SystemModel sys = testing::deterministic_system();
  const auto sol = solve_oracle(sys, NoiseModel{});
  const Graph g = build_graph("ring:4");
  const auto d = run_distributed(sys, NoiseModel{}, g, allocate_gains(g, 2, 1, GainMode::kUniform),
                                 Schedule{}, 10000, RngStream(0, streams::kNoise), &sol,
                                 DistributedOptions{.init = InitMode::kSpread});
  for (const auto& s : d.rounds.back().sensors) EXPECT_LT(*s.err_to_oracle, 1e-3);
}

TEST(RunDistributed, RejectsNonContractiveWeightAndZeroRounds) {
  const SystemModel sys = benchmark_system();
  const Graph g = build_graph("path:4");
  const auto alloc = allocate_gains(g, 2, 1, GainMode::kUniform);
  EXPECT_THROW(run_distributed(sys, benchmark_noise(), g, alloc, Schedule{}, 10, RngStream(0, 1),
                               nullptr, DistributedOptions{.consensus_weight = 1.0}),
               NotContractive);
  EXPECT_THROW(run_distributed(sys, benchmark_noise(), g, alloc, Schedule{}, 0, RngStream(0, 1)),
               BadSpec);
}

TEST(RunDistributed, DivergencePropagates) {
  const SystemModel sys = testing::scalar_system(2.0, 0.0, 1.0, 1.0);
  const Graph g = build_graph("ring:3");
  EXPECT_THROW(run_distributed(sys, NoiseModel{}, g, allocate_gains(g, 1, 1, GainMode::kUniform),
                               Schedule{1.0, 1, 1.0}, 100000, RngStream(0, 1)),
               Diverged);
}

TEST(InitialBank, SpreadJitterIsSymmetricPsdWithFixedMagnitude) {
  const SystemModel sys = benchmark_system();
  const auto bank = initial_bank(sys, 4, InitMode::kSpread, 21);
  const Eigen::MatrixXd base = QFactor::cost_weight(sys).matrix();
  for (const auto& G : bank.G) {
    const Eigen::MatrixXd jitter = G.matrix() - base;
    EXPECT_NEAR(jitter.norm(), kSpreadMagnitude, 1e-12);
    EXPECT_GE(testing::min_eigenvalue(jitter), -1e-14);
    EXPECT_TRUE(G.is_symmetric(0.0));
  }
  EXPECT_GT(consensus_diameter(bank.G), 0.0);
  EXPECT_EQ(parse_init_mode("spread"), InitMode::kSpread);
  EXPECT_THROW(parse_init_mode("random"), BadSpec);
}

TEST(CompareCentralized, SingleSensorHasZeroGap) {
  const SystemModel sys = benchmark_system();
  const Graph g = build_graph("single");
  const auto d = run_distributed(sys, benchmark_noise(), g, allocate_gains(g, 2, 1, GainMode::kUniform),
                                 Schedule{}, 50, RngStream(3, streams::kNoise));
  const auto c = run_centralized(sys, benchmark_noise(), Schedule{}, 50, RngStream(3, streams::kNoise));
  const auto report = compare_centralized(d, c);
  EXPECT_EQ(report.gap.size(), 50u);
  EXPECT_EQ(report.max_gap, 0.0);
}

TEST(CompareCentralized, NoStepKeepsAverageAtInitialization) {
  const SystemModel sys = benchmark_system();
  const Graph g = build_graph("ring:4");
  const auto d = run_distributed(sys, benchmark_noise(), g, allocate_gains(g, 2, 1, GainMode::kUniform),
                                 kNoStep, 20, RngStream(3, streams::kNoise));
  const auto c = run_centralized(sys, benchmark_noise(), kNoStep, 20, RngStream(3, streams::kNoise));
  EXPECT_EQ(compare_centralized(d, c).max_gap, 0.0);
}

TEST(CompareCentralized, GapShrinksOnBenchmark) {
  const SystemModel sys = benchmark_system();
  const Graph g = build_graph("ring:4");
  const auto alloc = allocate_gains(g, 2, 1, GainMode::kUniform);
  // Equal starts with shared noise keep every sensor on the centralized
  // iterate exactly, so spread the starting points to make the gap visible.
  std::vector<double> at10, at200;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto d = run_distributed(sys, benchmark_noise(), g, alloc, Schedule{}, 200,
                                   RngStream(seed, streams::kNoise), nullptr,
                                   DistributedOptions{.init = InitMode::kSpread});
    const auto c = run_centralized(sys, benchmark_noise(), Schedule{}, 200, RngStream(seed, streams::kNoise));
    const auto report = compare_centralized(d, c);
    at10.push_back(report.gap[9]);
    at200.push_back(report.gap[199]);
  }
  EXPECT_LT(median(at200), median(at10));
}

TEST(CompareCentralized, MismatchedNoiseRejected) {
  const SystemModel sys = benchmark_system();
  const Graph g = build_graph("ring:4");
  const auto alloc = allocate_gains(g, 2, 1, GainMode::kUniform);
  const auto c = run_centralized(sys, benchmark_noise(), Schedule{}, 10, RngStream(3, streams::kNoise));
  const auto other_seed = run_distributed(sys, benchmark_noise(), g, alloc, Schedule{}, 10,
                                          RngStream(4, streams::kNoise));
  EXPECT_THROW(compare_centralized(other_seed, c), SeedMismatch);
  const auto independent = run_distributed(sys, benchmark_noise(), g, alloc, Schedule{}, 10,
                                           RngStream(3, streams::kNoise), nullptr,
                                           DistributedOptions{.shared_noise = false});
  EXPECT_THROW(compare_centralized(independent, c), SeedMismatch);
  const auto other_stream = run_distributed(sys, benchmark_noise(), g, alloc, Schedule{}, 10,
                                            RngStream(3, streams::kSpread));
  EXPECT_THROW(compare_centralized(other_stream, c), SeedMismatch);
}

}  // namespace
}  // namespace distq
