#pragma once

#include <stdexcept>
#include <string>

namespace modpulse {

// Invalid input or configuration; maps to CLI exit code 2.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Any failure of a numerical stage; maps to CLI exit code 1.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Eigenvalue is not simple within the degeneracy tolerance.
class DegeneracyError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// An operator that must be invertible is numerically singular.
class ResonanceError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class ConvergenceError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class BlowUpError : public NumericalError {
 public:
  BlowUpError(const std::string& what, double last_valid_time)
      : NumericalError(what), last_valid_time_(last_valid_time) {}
  double last_valid_time() const noexcept { return last_valid_time_; }

 private:
  double last_valid_time_;
};

}  // namespace modpulse
