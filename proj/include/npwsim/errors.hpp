#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace npwsim {

/// Invalid configuration; the message names the offending field.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Bad call shape (length mismatch, grid mismatch, ...).
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A weighted average was requested from an ensemble whose weight sum vanished.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite density-matrix entries after a step.
class IntegratorBlowup : public std::runtime_error {
 public:
  IntegratorBlowup(std::int64_t step, const std::string& what)
      : std::runtime_error("integrator blow-up at step " + std::to_string(step) + ": " + what),
        step_(step) {}

  std::int64_t step() const noexcept { return step_; }

 private:
  std::int64_t step_;
};

}  // namespace npwsim
