#pragma once

#include <Eigen/Core>
#include <stdexcept>
#include <string>

namespace assg {

// Bad argument values: dimension mismatches, negative radii, out-of-range scalars.
struct InvalidInput : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Inconsistent or incomplete configuration (schedules, problem specs, CLI configs).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Iterative kernel failed to converge; carries the last iterate for diagnosis.
struct NumericalFailure : std::runtime_error {
  Eigen::VectorXd last_iterate;
  NumericalFailure(const std::string& msg, Eigen::VectorXd iterate)
      : std::runtime_error(msg), last_iterate(std::move(iterate)) {}
};

// Text-format parse failure with a 1-based line number.
struct ParseError : std::runtime_error {
  std::size_t line;
  ParseError(const std::string& msg, std::size_t line_number)
      : std::runtime_error(msg + " (line " + std::to_string(line_number) + ")"),
        line(line_number) {}
};

}  // namespace assg
