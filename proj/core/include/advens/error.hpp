#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace advens {

// Invalid hyper-parameters, architecture or attack/training configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid data handed to an operation (dimension mismatch, non-binary vector, empty batch).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed file content. Carries the 1-based line number when known (0 otherwise).
class ParseError : public InputError {
 public:
  ParseError(const std::string& what, std::size_t line)
      : InputError(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// An internal invariant was observed to be violated (e.g. an infeasible attack output).
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace advens
