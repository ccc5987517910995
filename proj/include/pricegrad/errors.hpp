#pragma once

// Error taxonomy. The CLI maps each class to a distinct exit code, so solver
// failures, hypothesis conflicts, and config problems stay distinguishable.

#include <stdexcept>
#include <string>

namespace pricegrad {

// Malformed or schema-invalid problem configuration.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// A numerical routine failed to produce a trustworthy answer
// (nonconvergence, ambiguous active set, oversized grid, ...).
struct SolverError : std::runtime_error {
  explicit SolverError(const std::string& msg) : std::runtime_error(msg) {}
};

// Input data contradicts a mathematical hypothesis the caller asserted
// (e.g. a certified demand pair that fails its stationarity residual).
struct HypothesisError : std::runtime_error {
  explicit HypothesisError(const std::string& msg) : std::runtime_error(msg) {}
};

// Report or series file could not be read or written.
struct IoError : std::runtime_error {
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace pricegrad
