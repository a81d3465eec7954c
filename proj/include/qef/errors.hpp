#pragma once

#include <stdexcept>
#include <string>

namespace qef {

// Bad CLI flags, config files, or parameter combinations.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed or contract-violating input data (CSV schema, class balance,
// degenerate covariate support, events outside the support).
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Binomial-regression objective is unbounded: iterates ran off to infinity
// with the objective still increasing (perfect separation).
class SeparationError : public std::runtime_error {
 public:
  explicit SeparationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Point-process maximum likelihood does not exist: iterates approach the
// boundary of the parameter space or diverge while the objective increases.
class DivergenceError : public std::runtime_error {
 public:
  explicit DivergenceError(const std::string& msg) : std::runtime_error(msg) {}
};

// Internal numerical defect (e.g. a bracketing root solve that cannot fail
// on finite inputs failed anyway).
class SolverError : public std::logic_error {
 public:
  explicit SolverError(const std::string& msg) : std::logic_error(msg) {}
};

}  // namespace qef
