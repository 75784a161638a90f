#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qoct {

/// Bad run configuration (invalid value or unknown key). Maps to CLI exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Numerical failure during a propagation. Maps to CLI exit code 3.
struct PropagationError : std::runtime_error {
  PropagationError(std::size_t step_index, const std::string& message)
      : std::runtime_error(message), step(step_index) {}
  std::size_t step;
};

}  // namespace qoct
