#pragma once

#include <stdexcept>
#include <string>

namespace nosam {

/// Invalid user input: bad config keys/values, malformed meshes, bad index sets.
class ConfigError : public std::invalid_argument {
public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

/// Numerical failure: singular systems, non-finite data, Schwarz divergence.
class SolverError : public std::runtime_error {
public:
  explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

class DivergenceError : public SolverError {
public:
  explicit DivergenceError(const std::string& what) : SolverError(what) {}
};

class IoError : public std::runtime_error {
public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace nosam
