#pragma once

#include <stdexcept>
#include <string>

namespace mams {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input document or command line.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Invalid simulation configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// The model is well-formed but outside the domain of an operation
/// (unstable load, zero event rate, invalid chain).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// The chain's transition graph is not strongly connected.
class StructuralError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// A linear solve or iteration could not reach the required accuracy.
class NumericalError : public Error {
 public:
  NumericalError(const std::string& what, double condition_estimate)
      : Error(what), condition_estimate_(condition_estimate) {}

  double condition_estimate() const noexcept { return condition_estimate_; }

 private:
  double condition_estimate_;
};

/// The transient oracle ran out of its step budget. Carries the estimate
/// reached so far and a bound on its truncation error.
class OracleBudgetError : public NumericalError {
 public:
  OracleBudgetError(const std::string& what, double partial_estimate, double error_bound)
      : NumericalError(what, 0.0), partial_estimate_(partial_estimate), error_bound_(error_bound) {}

  double partial_estimate() const noexcept { return partial_estimate_; }
  double error_bound() const noexcept { return error_bound_; }

 private:
  double partial_estimate_;
  double error_bound_;
};

}  // namespace mams
