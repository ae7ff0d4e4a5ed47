#pragma once

#include <random>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "distq/lq_core.h"

namespace distq::testing {

/// The 2-state, 1-input benchmark plant with w ~ N(1, 0.1).
inline SystemModel benchmark_system() {
  SystemModel sys;
  sys.A = (Eigen::MatrixXd(2, 2) << 0.2, 0.0, 0.0, 0.6).finished();
  sys.A_bar = (Eigen::MatrixXd(2, 2) << 0.7, 0.0, 0.0, 0.8).finished();
  sys.B = (Eigen::MatrixXd(2, 1) << 0.7, 0.3).finished();
  sys.B_bar = (Eigen::MatrixXd(2, 1) << 0.1, 0.7).finished();
  sys.Q = (Eigen::MatrixXd(2, 2) << 0.4, 0.0, 0.0, 0.7).finished();
  sys.R = Eigen::MatrixXd::Identity(1, 1);
  return sys;
}

inline NoiseModel benchmark_noise() { return NoiseModel{1.0, 0.1}; }

/// Benchmark plant with the multiplicative terms removed.
inline SystemModel deterministic_system() {
  SystemModel sys = benchmark_system();
  sys.A_bar.setZero();
  sys.B_bar.setZero();
  return sys;
}

inline SystemModel scalar_system(double a, double b, double q, double r) {
  SystemModel sys;
  sys.A = Eigen::MatrixXd::Constant(1, 1, a);
  sys.A_bar = Eigen::MatrixXd::Zero(1, 1);
  sys.B = Eigen::MatrixXd::Constant(1, 1, b);
  sys.B_bar = Eigen::MatrixXd::Zero(1, 1);
  sys.Q = Eigen::MatrixXd::Constant(1, 1, q);
  sys.R = Eigen::MatrixXd::Constant(1, 1, r);
  return sys;
}

/// G* for the benchmark plant, computed once by an independent NumPy Picard
/// iteration to a step size below 1e-13.
inline Eigen::MatrixXd benchmark_G_star() {
  return (Eigen::MatrixXd(3, 3) << 2.294761014728361, -3.0703612729492287, -0.61051443619822,
          -3.0703612729492287, 11.389867326581966, 5.058205850778371, -0.61051443619822,
          5.058205850778371, 4.18862773783324)
      .finished();
}

inline Eigen::MatrixXd random_matrix(std::mt19937_64& gen, int rows, int cols) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXd M(rows, cols);
  for (int c = 0; c < cols; ++c) {
    for (int r = 0; r < rows; ++r) M(r, c) = normal(gen);
  }
  return M;
}

/// Random symmetric positive definite matrix with eigenvalues >= floor.
inline Eigen::MatrixXd random_spd(std::mt19937_64& gen, int dim, double floor = 0.1) {
  const Eigen::MatrixXd M = random_matrix(gen, dim, dim);
  return M * M.transpose() + floor * Eigen::MatrixXd::Identity(dim, dim);
}

inline double min_eigenvalue(const Eigen::MatrixXd& S) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (S + S.transpose()),
                                                    Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

inline ::testing::AssertionResult matrices_near(const Eigen::MatrixXd& a,
                                                const Eigen::MatrixXd& b, double tol) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    return ::testing::AssertionFailure() << "shape mismatch";
  }
  const double err = (a - b).cwiseAbs().maxCoeff();
  if (err <= tol) return ::testing::AssertionSuccess();
  return ::testing::AssertionFailure() << "max abs difference " << err << " > " << tol << "\n"
                                       << a << "\nvs\n"
                                       << b;
}

}  // namespace distq::testing
