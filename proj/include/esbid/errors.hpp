#pragma once

#include <stdexcept>
#include <string>

namespace esbid {

// Bad user input: malformed config, out-of-range argument, violated precondition.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Structurally invalid configuration (dimension mismatches, bad parameter ranges).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// The market clearing problem has no feasible dispatch.
struct InfeasibleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A numerical routine failed beyond its recovery options.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace esbid
