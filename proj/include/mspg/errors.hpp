#pragma once

/// @file errors.hpp
/// @brief Exception hierarchy shared by all modules.
///
/// Every error carries a category; the CLI maps categories onto exit codes.

#include <stdexcept>
#include <string>

namespace mspg {

enum class ErrorCategory : int {
  invalid_mesh = 10,
  incompatible_grid = 11,
  invalid_coefficient = 12,
  index = 13,
  solver_failure = 14,
  local_solver = 15,
  singular_metric = 16,
  regularization = 17,
  singular_system = 18,
  parse = 19,
  io = 20,
  config = 21,
};

inline const char* category_name(ErrorCategory c)
{
  switch (c) {
    case ErrorCategory::invalid_mesh: return "invalid-mesh";
    case ErrorCategory::incompatible_grid: return "incompatible-grid";
    case ErrorCategory::invalid_coefficient: return "invalid-coefficient";
    case ErrorCategory::index: return "index";
    case ErrorCategory::solver_failure: return "solver-failure";
    case ErrorCategory::local_solver: return "local-solver";
    case ErrorCategory::singular_metric: return "singular-metric";
    case ErrorCategory::regularization: return "regularization";
    case ErrorCategory::singular_system: return "singular-system";
    case ErrorCategory::parse: return "parse";
    case ErrorCategory::io: return "io";
    case ErrorCategory::config: return "config";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(std::string(category_name(category)) + ": " + what), category_(category)
  {
  }

  ErrorCategory category() const noexcept { return category_; }
  int exit_code() const noexcept { return static_cast<int>(category_); }

 private:
  ErrorCategory category_;
};

/// Global solve did not reach the requested relative residual.
class SolverFailure : public Error {
 public:
  SolverFailure(const std::string& what, double achieved_residual)
      : Error(ErrorCategory::solver_failure,
              what + " (achieved relative residual " + std::to_string(achieved_residual) + ")"),
        residual_(achieved_residual)
  {
  }

  double achieved_residual() const noexcept { return residual_; }

 private:
  double residual_;
};

}  // namespace mspg
