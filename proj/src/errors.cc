#include "distq/errors.h"

#include <sstream>

namespace distq {

namespace {

std::string join_violations(const std::vector<std::string>& violations) {
  std::ostringstream out;
  out << "invalid configuration";
  for (const auto& v : violations) out << "\n  - " << v;
  return out.str();
}

}  // namespace

NoConvergence::NoConvergence(std::size_t iterations, double residual)
    : Error("fixed-point iteration did not converge after " + std::to_string(iterations) +
            " iterations (residual " + std::to_string(residual) + ")"),
      iterations_(iterations),
      residual_(residual) {}

NotStabilizing::NotStabilizing(double spectral_radius)
    : Error("gain is not mean-square stabilizing (spectral radius " +
            std::to_string(spectral_radius) + ")"),
      spectral_radius_(spectral_radius) {}

Diverged::Diverged(std::size_t round, double norm)
    : Error("iterate diverged at round " + std::to_string(round) + " (norm " +
            std::to_string(norm) + ")"),
      round_(round),
      norm_(norm) {}

NotContractive::NotContractive(double weight, double lambda_max)
    : Error("consensus operator not contractive: weight " + std::to_string(weight) +
            " times lambda_max " + std::to_string(lambda_max) + " >= 2"),
      weight_(weight),
      lambda_max_(lambda_max) {}

ValidationError::ValidationError(std::vector<std::string> violations)
    : Error(join_violations(violations)), violations_(std::move(violations)) {}

}  // namespace distq
