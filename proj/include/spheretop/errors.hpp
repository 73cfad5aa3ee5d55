#pragma once

#include <stdexcept>
#include <string>

namespace spheretop {

/// Argument outside the domain of a chart, a formula, or a parameter constraint.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Iterative solve that did not reach its tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double residual, int iterations)
      : std::runtime_error(what), residual_(residual), iterations_(iterations) {}

  double residual() const noexcept { return residual_; }
  int iterations() const noexcept { return iterations_; }

 private:
  double residual_;
  int iterations_;
};

/// Invalid run configuration (schema, ranges, unknown keys).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace spheretop
