#pragma once

#include <stdexcept>
#include <string>

namespace covlearn {

/// Invalid configuration: bad bounds, malformed options, unknown method.
/// Mapped to CLI exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed or inconsistent input data. Mapped to CLI exit code 3.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

/// Solver failed to reach its convergence criteria where the caller required
/// it. Mapped to CLI exit code 4.
class ConvergenceError : public std::runtime_error {
 public:
  explicit ConvergenceError(const std::string& what)
      : std::runtime_error(what) {}
};

}  // namespace covlearn
