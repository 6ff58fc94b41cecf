#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hjlab {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inconsistent inputs: grid mismatch, bad config value, unresolved band.
class ConfigurationError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// (gamma, q, d) violates the integrability assumption q > d(gamma-1)/gamma or q > 2.
class AdmissibilityError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// A pointwise evaluation produced a non-finite value.
class EvaluationError : public Error {
 public:
  EvaluationError(const std::string& what, std::size_t node)
      : Error(what), node_(node) {}
  std::size_t node() const noexcept { return node_; }

 private:
  std::size_t node_;
};

/// The pseudo-time relaxation blew up.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, std::size_t step)
      : Error(what), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

/// Adaptive quadrature failed to reach its requested tolerance.
class PrecisionError : public Error {
 public:
  PrecisionError(const std::string& what, double achieved)
      : Error(what), achieved_(achieved) {}
  double achieved() const noexcept { return achieved_; }

 private:
  double achieved_;
};

/// Missing, truncated or malformed files.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace hjlab
