#include "gdm/errors.hpp"

#include <utility>

namespace gdm {

ParseError::ParseError(const std::string& what, std::size_t line)
    : DataError(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
      line_(line) {}

ConvergenceError::ConvergenceError(const std::string& what,
                                   std::vector<double> best_alpha,
                                   double best_objective, double residual)
    : Error(what),
      best_alpha_(std::move(best_alpha)),
      best_objective_(best_objective),
      residual_(residual) {}

}  // namespace gdm
