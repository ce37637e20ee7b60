#pragma once

#include <stdexcept>

namespace hsreg {

// Failure taxonomy shared across the library. The CLI maps these onto
// process exit codes: io_error -> 2, config_error -> 3, numeric_error -> 4.
struct io_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct numeric_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Length/dimension mismatches between paired inputs.
struct shape_error : config_error {
  using config_error::config_error;
};

}  // namespace hsreg
