#pragma once

#include <stdexcept>
#include <string>

namespace tgsta {

// Precondition and parameter violations are reported as std::invalid_argument.
// The two types below separate numerical failures so drivers can map them to
// distinct exit codes.

/// An iterative solver (root finder, quadrature, imaginary-time relaxation,
/// eigensolver) did not reach its tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A runtime validity monitor tripped: too much norm near the box edges or in
/// the highest resolved wavenumbers.
class MonitorTrip : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace tgsta
