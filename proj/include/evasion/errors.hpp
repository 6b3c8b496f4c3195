#pragma once

#include <stdexcept>
#include <string>

namespace evasion {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The dynamic single-track model divides by v_x; below the guard speed it is refused.
class LowSpeedDomain : public Error {
 public:
  using Error::Error;
};

/// A y_max query outside the tabulated (t, v) grid.
class OutOfTable : public Error {
 public:
  using Error::Error;
};

class NonFiniteObjective : public Error {
 public:
  using Error::Error;
};

/// Scenario file problems. `line()` is 0 when the error is not tied to a line.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, int line = 0)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

}  // namespace evasion
