#pragma once

#include <stdexcept>
#include <string>

namespace trm {

// Error categories, matched one-to-one with the CLI exit codes
// (config -> 2, data -> 3, numerical -> 4).

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct DataError : std::runtime_error {
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// CFL violations, out-of-range states, NaN/Inf losses.
struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

struct DimensionError : std::runtime_error {
  explicit DimensionError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace trm
