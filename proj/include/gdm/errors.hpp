#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace gdm {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input, inconsistent dimensions, or data that cannot be fitted
/// (single-class labels, no usable features).
class DataError : public Error {
 public:
  using Error::Error;
};

/// LIBSVM text that cannot be parsed. `line()` is 1-based, 0 when the error is
/// not tied to a particular line.
class ParseError : public DataError {
 public:
  ParseError(const std::string& what, std::size_t line);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// The min-max subproblem did not reach its tolerance within the iteration
/// cap. Carries the best iterate found so far.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, std::vector<double> best_alpha,
                   double best_objective, double residual);

  const std::vector<double>& best_alpha() const noexcept { return best_alpha_; }
  double best_objective() const noexcept { return best_objective_; }
  double residual() const noexcept { return residual_; }

 private:
  std::vector<double> best_alpha_;
  double best_objective_;
  double residual_;
};

}  // namespace gdm
