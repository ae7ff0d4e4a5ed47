#pragma once

#include <cstddef>

#include <Eigen/Dense>

namespace distq {

inline constexpr double kDefaultPinvTol = 1e-12;
inline constexpr double kDefaultOracleTol = 1e-12;
inline constexpr std::size_t kDefaultOracleMaxIter = 100000;
/// Tolerance used when asserting symmetry of Q-factor estimates.
inline constexpr double kSymTol = 1e-9;

/// Plant x(k+1) = (A + A_bar w(k)) x(k) + (B + B_bar w(k)) u(k) with stage
/// cost x'Qx + u'Ru.
struct SystemModel {
  Eigen::MatrixXd A;
  Eigen::MatrixXd A_bar;
  Eigen::MatrixXd B;
  Eigen::MatrixXd B_bar;
  Eigen::MatrixXd Q;
  Eigen::MatrixXd R;

  int n() const { return static_cast<int>(A.rows()); }
  int m() const { return static_cast<int>(B.cols()); }

  /// Throws BadSpec on inconsistent dimensions or if Q, R are not
  /// symmetric positive definite.
  void validate() const;
};

/// First two moments of the scalar multiplicative noise w(k) ~ N(mu, sigma2).
struct NoiseModel {
  double mu = 0.0;
  double sigma2 = 0.0;

  double second_moment() const { return mu * mu + sigma2; }
  void validate() const;
};

/// Symmetric (n+m)x(n+m) Q-factor with the state/input block partition.
class QFactor {
 public:
  QFactor(int n, int m);
  /// Takes ownership of `G`; throws BadSpec if G is not (n+m) square.
  QFactor(Eigen::MatrixXd G, int n);

  /// diag(Q, R) for the given plant.
  static QFactor cost_weight(const SystemModel& sys);

  int n() const { return n_; }
  int m() const { return static_cast<int>(G_.rows()) - n_; }
  int dim() const { return static_cast<int>(G_.rows()); }

  const Eigen::MatrixXd& matrix() const { return G_; }
  Eigen::MatrixXd& matrix() { return G_; }

  auto xx() const { return G_.topLeftCorner(n_, n_); }
  auto xu() const { return G_.topRightCorner(n_, m()); }
  auto ux() const { return G_.bottomLeftCorner(m(), n_); }
  auto uu() const { return G_.bottomRightCorner(m(), m()); }

  /// G <- (G + G') / 2.
  void symmetrize();
  bool is_symmetric(double tol = kSymTol) const;

 private:
  Eigen::MatrixXd G_;
  int n_;
};

/// u = K x, K is m x n.
struct Gain {
  Eigen::MatrixXd K;
};

struct PinvDiagnostic {
  bool rank_deficient = false;
  Eigen::Index rank = 0;
};

/// Moore-Penrose pseudo-inverse; singular values below tol * sigma_max are
/// treated as zero.
Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& M, double tol = kDefaultPinvTol,
                               PinvDiagnostic* diag = nullptr);

/// Schur complement G_xx - G_xu pinv(G_uu) G_ux, symmetrized.
Eigen::MatrixXd pi_map(const QFactor& G, double pinv_tol = kDefaultPinvTol,
                       PinvDiagnostic* diag = nullptr);

/// K = -pinv(G_uu) G_ux.
Gain gamma_map(const QFactor& G, double pinv_tol = kDefaultPinvTol,
               PinvDiagnostic* diag = nullptr);

/// The deterministic Q-factor E[[Q + A'PA, A'PB], [B'PA, B'PB + R]] for a
/// given value matrix P, with the expectation over (A(k), B(k)) expanded in
/// closed form using E[w] = mu and E[w^2] = mu^2 + sigma^2.
QFactor q_factor_of_value(const Eigen::MatrixXd& P, const SystemModel& sys,
                          const NoiseModel& noise);

/// G -> q_factor_of_value(pi_map(G)). Its fixed point is G*.
QFactor expectation_map(const QFactor& G, const SystemModel& sys, const NoiseModel& noise,
                        double pinv_tol = kDefaultPinvTol);

struct OracleSolution {
  QFactor G_star;
  Eigen::MatrixXd P;
  Gain K_star;
  std::size_t iterations = 0;
  double residual = 0.0;
  double spectral_radius = 0.0;
};

/// Picard iteration G <- expectation_map(G) from diag(Q, R) until
/// ||G - expectation_map(G)||_F <= tol.
///
/// Throws NoConvergence when the budget is exhausted and NotStabilizing when
/// the resulting gain fails the mean-square stability test.
OracleSolution solve_oracle(const SystemModel& sys, const NoiseModel& noise,
                            double oracle_tol = kDefaultOracleTol,
                            std::size_t max_iter = kDefaultOracleMaxIter);

/// K = -[E B(k)'PB(k) + R]^{-1} E B(k)'PA(k), with the expectations written
/// out term by term. Throws SingularInnerMatrix if the bracket is singular.
Gain optimal_gain_closed_form(const Eigen::MatrixXd& P, const SystemModel& sys,
                              const NoiseModel& noise);

struct StabilityReport {
  bool stable = false;
  double spectral_radius = 0.0;
};

/// Spectral radius of the closed-loop second-moment operator
///   Acl (x) Acl + mu (Acl (x) Abcl + Abcl (x) Acl) + (mu^2 + sigma^2) Abcl (x) Abcl
/// with Acl = A + BK and Abcl = A_bar + B_bar K.
StabilityReport ms_stability_check(const Gain& K, const SystemModel& sys,
                                   const NoiseModel& noise);

/// ||P - Pi(q_factor_of_value(P))||_F; zero iff P solves the generalized ARE.
double riccati_residual(const Eigen::MatrixXd& P, const SystemModel& sys,
                        const NoiseModel& noise);

}  // namespace distq
