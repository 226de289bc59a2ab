#pragma once

#include <stdexcept>
#include <string>

namespace mnsim {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A documented precondition was violated (bad grid, index out of range,
/// divergent norm, ...).
class DomainError : public Error {
public:
  using Error::Error;
};

/// Invalid run configuration. The message names the offending path.
class ConfigError : public Error {
public:
  using Error::Error;
};

/// Picard iteration did not reach its tolerance, or left the certified ball.
class ConvergenceError : public Error {
public:
  ConvergenceError(const std::string& what, double contraction_estimate)
      : Error(what), contraction_estimate_(contraction_estimate) {}
  double contraction_estimate() const noexcept { return contraction_estimate_; }

private:
  double contraction_estimate_;
};

/// A run violated a property that the continuous problem guarantees
/// (growth certificate exceeded, step underflow).
class IntegrityError : public Error {
public:
  using Error::Error;
};

/// Malformed or corrupted state file.
class FormatError : public Error {
public:
  using Error::Error;
};

}  // namespace mnsim
