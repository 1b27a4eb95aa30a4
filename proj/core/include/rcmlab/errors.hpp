#pragma once

#include <stdexcept>
#include <string>

namespace rcm {

/// Invalid configuration (bad law parameters, malformed experiment config, ...).
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Argument outside the mathematical domain of an operation.
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

/// A stated precondition does not hold on this environment/seed.
/// Carries enough context to name the offending cell/site/box.
struct PreconditionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Floating-point breakdown (non-SPD numerics, NaN propagation).
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// I/O failure on export/import.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace rcm
