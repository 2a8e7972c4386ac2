#pragma once

#include <stdexcept>
#include <string>

namespace wavekit {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Vector/matrix length disagreement.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Response or parameter outside the loss family's domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

// exp() or similar left the representable range during loss evaluation.
class LossOverflowError : public Error {
 public:
  using Error::Error;
};

// Bad user-supplied configuration (grids, fold counts, shard policies, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A matrix that must be inverted is (numerically) singular.
class SingularityError : public Error {
 public:
  using Error::Error;
};

// A received summary violates its invariants (e.g. nonpositive weight).
class DataIntegrityError : public Error {
 public:
  using Error::Error;
};

// ADMM ran out of outer iterations far from feasibility.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& msg, double residual)
      : Error(msg), residual(residual) {}
  double residual;
};

// The inner Newton solve produced a non-finite objective.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& msg, int iterations)
      : Error(msg), iterations(iterations) {}
  int iterations;
};

// Wire-format decoding failure; `field` names the offending key.
class DecodeError : public Error {
 public:
  DecodeError(const std::string& msg, std::string field_name)
      : Error(msg + " (field: " + field_name + ")"), field(std::move(field_name)) {}
  std::string field;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace wavekit
