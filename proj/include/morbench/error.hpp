#pragma once

#include <stdexcept>
#include <string>

namespace morbench {

// Base for every failure raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input text (corpus lines, vector files, raw result files).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Well-formed input that violates a domain invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Shape mismatches and other programming-contract violations.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Missing or unreadable files.
class IoError : public Error {
 public:
  using Error::Error;
};

// Bad user configuration (unknown names, out-of-range hyperparameters).
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace morbench
