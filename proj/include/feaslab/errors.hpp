#pragma once

#include <stdexcept>
#include <string>

namespace feaslab {

/// Raised when an experiment configuration is malformed or inconsistent.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Raised when an optimization routine fails (cycling guard, unbounded model, ...).
class SolverError : public std::runtime_error {
 public:
  explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

/// Raised when output files cannot be written.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace feaslab
