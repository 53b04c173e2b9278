#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nr {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes are incompatible.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A precondition on caller-supplied input does not hold (empty sequence,
/// id out of range, bad configuration value, ...).
class InputError : public Error {
 public:
  using Error::Error;
};

/// Malformed bAbI text. Carries the 1-based line number of the offending line.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Training produced a non-finite value.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace nr
