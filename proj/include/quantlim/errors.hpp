#pragma once

#include <stdexcept>
#include <string>

namespace quantlim {

// Config, argument, or spec-consistency violations. CLI maps these to exit code 1.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Numerical failures: lost brackets, table invariant breaches, boundary thetas.
// CLI maps these to exit code 2.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace quantlim
