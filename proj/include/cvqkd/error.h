#pragma once

#include <stdexcept>
#include <string>

namespace cvqkd {

// Precondition violated by the caller (bad range, malformed data).
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A well-formed request with no solution (e.g. no pulse shaping achieves the
// requested trigger shift).
class Infeasible : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Estimator or fit undefined for the given data (zero regressor, identical
// abscissae, t_hat = 0).
class Degenerate : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Floating-point result outside its mathematical domain beyond tolerance.
class NumericalDomain : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Configuration text rejected at parse time; carries the 1-based line number
// (0 when the problem is not tied to a line, e.g. a missing key).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::size_t line, const std::string& what)
      : std::runtime_error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace cvqkd
