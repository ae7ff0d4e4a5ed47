#include "distq/lq_core.h"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/KroneckerProduct>

#include "distq/errors.h"

namespace distq {

namespace {

bool is_symmetric_pd(const Eigen::MatrixXd& M) {
  if (M.rows() != M.cols() || M.rows() == 0) return false;
  if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-10 * std::max(1.0, M.norm())) return false;
  Eigen::LLT<Eigen::MatrixXd> llt(M);
  return llt.info() == Eigen::Success;
}

// E[X(k)' P Y(k)] for X(k) = X + Xb w, Y(k) = Y + Yb w.
Eigen::MatrixXd expected_bilinear(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Xb,
                                  const Eigen::MatrixXd& P, const Eigen::MatrixXd& Y,
                                  const Eigen::MatrixXd& Yb, const NoiseModel& noise) {
  return X.transpose() * P * Y + noise.mu * (X.transpose() * P * Yb + Xb.transpose() * P * Y) +
         noise.second_moment() * (Xb.transpose() * P * Yb);
}

}  // namespace

void SystemModel::validate() const {
  const auto n = A.rows();
  const auto m = B.cols();
  if (n == 0 || A.cols() != n) throw BadSpec("A must be a non-empty square matrix");
  if (A_bar.rows() != n || A_bar.cols() != n) throw BadSpec("A_bar must be n x n");
  if (B.rows() != n || m == 0) throw BadSpec("B must be n x m with m >= 1");
  if (B_bar.rows() != n || B_bar.cols() != m) throw BadSpec("B_bar must be n x m");
  if (Q.rows() != n || Q.cols() != n) throw BadSpec("Q must be n x n");
  if (R.rows() != m || R.cols() != m) throw BadSpec("R must be m x m");
  if (!is_symmetric_pd(Q)) throw BadSpec("Q must be positive definite");
  if (!is_symmetric_pd(R)) throw BadSpec("R must be positive definite");
}

void NoiseModel::validate() const {
  if (!std::isfinite(mu)) throw BadSpec("noise mean must be finite");
  if (!(sigma2 >= 0.0) || !std::isfinite(sigma2)) throw BadSpec("noise variance must be >= 0");
}

QFactor::QFactor(int n, int m) : G_(Eigen::MatrixXd::Zero(n + m, n + m)), n_(n) {}

QFactor::QFactor(Eigen::MatrixXd G, int n) : G_(std::move(G)), n_(n) {
  if (G_.rows() != G_.cols() || n_ < 1 || n_ >= G_.rows()) {
    throw BadSpec("Q-factor must be square with n < n + m");
  }
}

QFactor QFactor::cost_weight(const SystemModel& sys) {
  QFactor G(sys.n(), sys.m());
  G.G_.topLeftCorner(sys.n(), sys.n()) = sys.Q;
  G.G_.bottomRightCorner(sys.m(), sys.m()) = sys.R;
  return G;
}

void QFactor::symmetrize() {
  G_ = (0.5 * (G_ + G_.transpose())).eval();
}

bool QFactor::is_symmetric(double tol) const {
  return (G_ - G_.transpose()).cwiseAbs().maxCoeff() <= tol;
}

Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& M, double tol, PinvDiagnostic* diag) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  const double cutoff = s.size() > 0 ? tol * s(0) : 0.0;
  Eigen::VectorXd s_inv = Eigen::VectorXd::Zero(s.size());
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > cutoff && s(i) > 0.0) {
      s_inv(i) = 1.0 / s(i);
      ++rank;
    }
  }
  if (diag != nullptr) {
    diag->rank = rank;
    diag->rank_deficient = rank < std::min(M.rows(), M.cols());
  }
  return svd.matrixV() * s_inv.asDiagonal() * svd.matrixU().transpose();
}

Eigen::MatrixXd pi_map(const QFactor& G, double pinv_tol, PinvDiagnostic* diag) {
  const Eigen::MatrixXd uu_pinv = pseudo_inverse(G.uu(), pinv_tol, diag);
  Eigen::MatrixXd P = G.xx() - G.xu() * uu_pinv * G.ux();
  return 0.5 * (P + P.transpose());
}

Gain gamma_map(const QFactor& G, double pinv_tol, PinvDiagnostic* diag) {
  return Gain{-pseudo_inverse(G.uu(), pinv_tol, diag) * G.ux()};
}

QFactor q_factor_of_value(const Eigen::MatrixXd& P, const SystemModel& sys,
                          const NoiseModel& noise) {
  const int n = sys.n();
  const int m = sys.m();
  Eigen::MatrixXd H(n + m, n + m);
  H.topLeftCorner(n, n) = sys.Q + expected_bilinear(sys.A, sys.A_bar, P, sys.A, sys.A_bar, noise);
  H.topRightCorner(n, m) = expected_bilinear(sys.A, sys.A_bar, P, sys.B, sys.B_bar, noise);
  H.bottomLeftCorner(m, n) = expected_bilinear(sys.B, sys.B_bar, P, sys.A, sys.A_bar, noise);
  H.bottomRightCorner(m, m) =
      expected_bilinear(sys.B, sys.B_bar, P, sys.B, sys.B_bar, noise) + sys.R;
  QFactor G(std::move(H), n);
  G.symmetrize();
  return G;
}

QFactor expectation_map(const QFactor& G, const SystemModel& sys, const NoiseModel& noise,
                        double pinv_tol) {
  return q_factor_of_value(pi_map(G, pinv_tol), sys, noise);
}

OracleSolution solve_oracle(const SystemModel& sys, const NoiseModel& noise, double oracle_tol,
                            std::size_t max_iter) {
  if (!(oracle_tol > 0.0)) throw BadSpec("oracle tolerance must be positive");
  if (max_iter < 1) throw BadSpec("oracle max_iter must be >= 1");

  QFactor G = QFactor::cost_weight(sys);
  double residual = 0.0;
  std::size_t it = 0;
  for (;;) {
    QFactor next = expectation_map(G, sys, noise);
    residual = (next.matrix() - G.matrix()).norm();
    if (residual <= oracle_tol) break;
    if (!std::isfinite(residual) || it == max_iter) throw NoConvergence(it, residual);
    G = std::move(next);
    ++it;
  }

  OracleSolution sol{G, pi_map(G), gamma_map(G), it, residual, 0.0};
  const auto stab = ms_stability_check(sol.K_star, sys, noise);
  sol.spectral_radius = stab.spectral_radius;
  if (!stab.stable) throw NotStabilizing(stab.spectral_radius);
  return sol;
}

Gain optimal_gain_closed_form(const Eigen::MatrixXd& P, const SystemModel& sys,
                              const NoiseModel& noise) {
  const Eigen::MatrixXd inner =
      expected_bilinear(sys.B, sys.B_bar, P, sys.B, sys.B_bar, noise) + sys.R;
  const Eigen::MatrixXd coupling = expected_bilinear(sys.B, sys.B_bar, P, sys.A, sys.A_bar, noise);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(inner);
  if (!lu.isInvertible()) throw SingularInnerMatrix("E[B'PB] + R is singular");
  return Gain{-lu.solve(coupling)};
}

StabilityReport ms_stability_check(const Gain& K, const SystemModel& sys,
                                   const NoiseModel& noise) {
  const Eigen::MatrixXd Acl = sys.A + sys.B * K.K;
  const Eigen::MatrixXd Abcl = sys.A_bar + sys.B_bar * K.K;
  const Eigen::MatrixXd lifted =
      Eigen::kroneckerProduct(Acl, Acl).eval() +
      noise.mu * (Eigen::kroneckerProduct(Acl, Abcl).eval() +
                  Eigen::kroneckerProduct(Abcl, Acl).eval()) +
      noise.second_moment() * Eigen::kroneckerProduct(Abcl, Abcl).eval();
  Eigen::EigenSolver<Eigen::MatrixXd> es(lifted, /*computeEigenvectors=*/false);
  const double rho = es.eigenvalues().cwiseAbs().maxCoeff();
  return StabilityReport{rho < 1.0, rho};
}

double riccati_residual(const Eigen::MatrixXd& P, const SystemModel& sys,
                        const NoiseModel& noise) {
  return (P - pi_map(q_factor_of_value(P, sys, noise))).norm();
}

}  // namespace distq
