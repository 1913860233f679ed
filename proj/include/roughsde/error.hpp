#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace roughsde {

// Argument outside the mathematical domain of an operation (negative time,
// H outside its admissible range, overlapping intervals, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A numerical procedure could not produce a trustworthy result
// (failed factorization, negative embedding eigenvalue, state overflow).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An iterative driver hit its refinement cap. Carries the sequence of
// Cauchy differences observed before giving up.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, std::vector<double> trace)
      : std::runtime_error(what), trace_(std::move(trace)) {}
  const std::vector<double>& trace() const noexcept { return trace_; }

 private:
  std::vector<double> trace_;
};

}  // namespace roughsde
