#pragma once

#include <stdexcept>
#include <string>

namespace km {

// Thrown for file/stream problems (missing path, malformed line, ...).
// Everything the CLI maps to exit code 2.
struct IoError : std::runtime_error {
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// Thrown when a solver produces non-finite values or otherwise cannot
// continue numerically.  CLI exit code 3.
struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace km
