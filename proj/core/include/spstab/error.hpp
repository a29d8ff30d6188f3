#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace spstab {

// Invalid input: wrong lengths, out-of-domain arguments, bad parameters.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A numerical routine failed to reach its tolerance.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what, double achieved = 0.0)
      : std::runtime_error(what), achieved_(achieved) {}

  double achieved() const noexcept { return achieved_; }

 private:
  double achieved_;
};

// The neglected part of a truncated spectral sum is too large.
class TruncationError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// No Fermi level reproduces the requested charge with the available modes.
class InfeasibleError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// Outer iteration exhausted its budget; carries the residual history.
class ConvergenceError : public NumericalError {
 public:
  ConvergenceError(const std::string& what, std::vector<double> history)
      : NumericalError(what, history.empty() ? 0.0 : history.back()),
        history_(std::move(history)) {}

  const std::vector<double>& history() const noexcept { return history_; }

 private:
  std::vector<double> history_;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace spstab
