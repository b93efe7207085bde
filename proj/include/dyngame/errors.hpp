#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace dyngame {

// Base class for all errors raised by this library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input files or CLI arguments.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Incompatible matrix/vector dimensions.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A structural assumption on the problem data does not hold
// (singular A, loss of stabilizability/detectability, PSD failure, ...).
class AssumptionError : public Error {
 public:
  using Error::Error;
};

// Eigenvalue resonance making a linear matrix equation singular.
class ResonanceError : public Error {
 public:
  using Error::Error;
};

// An iterative solver ran out of iterations. Carries the residual history
// so callers can inspect how the iteration behaved.
class NonConvergenceError : public Error {
 public:
  NonConvergenceError(const std::string& msg, std::vector<double> residuals)
      : Error(msg), residual_history(std::move(residuals)) {}
  explicit NonConvergenceError(const std::string& msg) : Error(msg) {}

  std::vector<double> residual_history;
};

// The feasible set of a constrained problem is (numerically) empty.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

}  // namespace dyngame
