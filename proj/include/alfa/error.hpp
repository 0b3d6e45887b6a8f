#pragma once

#include <stdexcept>
#include <string>

namespace alfa {

// Base for every error the library throws. The exit code is what the CLI
// returns when the error escapes a subcommand.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what, int exit_code = 2)
      : std::runtime_error(what), exit_code_(exit_code) {}
  int exit_code() const noexcept { return exit_code_; }

 private:
  int exit_code_;
};

// Bad input: malformed DIMACS, invalid parameters, broken config files.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(what, 2) {}
};

// A configured budget ran out (flips, attempts, closure size, nodes).
class BudgetError : public Error {
 public:
  explicit BudgetError(const std::string& what) : Error(what, 3) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(what, 4) {}
};

// Numerical procedure could not produce a meaningful answer.
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error(what, 2) {}
};

}  // namespace alfa
