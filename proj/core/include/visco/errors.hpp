#pragma once

#include <stdexcept>
#include <string>

namespace visco {

/// Raised when a configuration document or a run specification is invalid.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, int line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

/// Raised when a time integrator produces non-finite values.
/// last_finite_time() is the last time at which the state was still finite.
class BlowUpError : public std::runtime_error {
 public:
  BlowUpError(const std::string& what, double last_finite_time)
      : std::runtime_error(what + " (last finite t=" + std::to_string(last_finite_time) + ")"),
        last_finite_time_(last_finite_time) {}
  double last_finite_time() const noexcept { return last_finite_time_; }

 private:
  double last_finite_time_;
};

/// Raised when a parameter violates a threshold required by an energy functional,
/// e.g. eps >= mu/4 for the symmetrizer energy.
class ThresholdError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace visco
