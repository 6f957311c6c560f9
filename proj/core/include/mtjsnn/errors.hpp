#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace mtjsnn {

class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// NaN/Inf encountered while integrating; carries the offending step index.
class NumericalFailure : public std::runtime_error {
 public:
  NumericalFailure(const std::string& what, std::uint64_t step)
      : std::runtime_error(what + " (step " + std::to_string(step) + ")"), step_(step) {}
  std::uint64_t step() const noexcept { return step_; }

 private:
  std::uint64_t step_;
};

// Sampled data does not cover the range a fit or estimate needs.
class InsufficientRange : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InsufficientStatistics : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TargetUnreached : public std::runtime_error {
 public:
  TargetUnreached(const std::string& what, double best_accuracy)
      : std::runtime_error(what), best_accuracy_(best_accuracy) {}
  double best_accuracy() const noexcept { return best_accuracy_; }

 private:
  double best_accuracy_;
};

}  // namespace mtjsnn
