#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace distq {

/// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Picard iteration of the Q-factor fixed point did not reach the tolerance.
class NoConvergence : public Error {
 public:
  NoConvergence(std::size_t iterations, double residual);
  std::size_t iterations() const { return iterations_; }
  double residual() const { return residual_; }

 private:
  std::size_t iterations_;
  double residual_;
};

/// A gain that was required to be mean-square stabilizing is not.
class NotStabilizing : public Error {
 public:
  explicit NotStabilizing(double spectral_radius);
  double spectral_radius() const { return spectral_radius_; }

 private:
  double spectral_radius_;
};

class SingularInnerMatrix : public Error {
 public:
  using Error::Error;
};

/// An iterate or trajectory left the admissible range. `round` is the
/// 1-based iteration at which the cap was exceeded.
class Diverged : public Error {
 public:
  Diverged(std::size_t round, double norm);
  std::size_t round() const { return round_; }
  double norm() const { return norm_; }

 private:
  std::size_t round_;
  double norm_;
};

class BadSpec : public Error {
 public:
  using Error::Error;
};

class Disconnected : public Error {
 public:
  using Error::Error;
};

class NotContractive : public Error {
 public:
  NotContractive(double weight, double lambda_max);
  double weight() const { return weight_; }
  double lambda_max() const { return lambda_max_; }

 private:
  double weight_;
  double lambda_max_;
};

class SeedMismatch : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

/// Aggregates every violated precondition found while validating a config.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  std::vector<std::string> violations_;
};

}  // namespace distq
