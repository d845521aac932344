#pragma once

#include <stdexcept>
#include <string>

namespace dsp {

/// Invalid configuration value; raised before any work starts.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The optimization produced a NaN or infinite energy.
class NonFiniteLoss : public std::runtime_error {
 public:
  NonFiniteLoss(int iteration, double value)
      : std::runtime_error("non-finite energy " + std::to_string(value) + " at iteration " +
                           std::to_string(iteration)),
        iteration_(iteration),
        value_(value) {}

  int iteration() const { return iteration_; }
  double value() const { return value_; }

 private:
  int iteration_;
  double value_;
};

}  // namespace dsp
