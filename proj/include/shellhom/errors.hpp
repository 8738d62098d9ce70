#pragma once
// Error taxonomy mirrored by the CLI exit codes: numeric failures (solver
// non-convergence, solvability violations) exit 2, configuration and input
// errors exit 3. Plain std::logic_error marks programming mistakes.

#include <stdexcept>
#include <string>

namespace shellhom {

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

struct IoError : std::runtime_error {
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace shellhom
