#pragma once

#include <stdexcept>
#include <string>

namespace offload {

/// Invalid model parameters or arguments. Maps to CLI exit code 1.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Intermediate priority class is empty, so the ambulance/walk-in split p, q is 0/0.
class DegenerateMixError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Iterative numerics failed to reach the requested tolerance. Maps to CLI exit code 2.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double best_value, double delta)
      : std::runtime_error(what), best_value_(best_value), delta_(delta) {}

  double best_value() const noexcept { return best_value_; }
  double delta() const noexcept { return delta_; }

 private:
  double best_value_;
  double delta_;
};

/// Statistical procedure cannot run on the supplied sample (too few cycles, bad densities).
class SampleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace offload
