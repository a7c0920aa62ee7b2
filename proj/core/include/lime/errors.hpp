#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lime {

// Root of every error the library raises.
class LimeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration (symbol counts, ranges, weights). CLI exit code 2.
class ConfigError : public LimeError {
 public:
  using LimeError::LimeError;
};

// A resampling loop ran out of attempts. CLI exit code 4.
class GenerationError : public LimeError {
 public:
  using LimeError::LimeError;
};

class IoError : public LimeError {
 public:
  using LimeError::LimeError;
};

class UnknownSymbol : public LimeError {
 public:
  using LimeError::LimeError;
};

class MissingBinding : public LimeError {
 public:
  using LimeError::LimeError;
};

class TaskMismatch : public LimeError {
 public:
  using LimeError::LimeError;
};

class InvalidSpan : public LimeError {
 public:
  using LimeError::LimeError;
};

class SpanMismatch : public LimeError {
 public:
  using LimeError::LimeError;
};

// Malformed token sequence; offset is the index of the offending token.
class ParseError : public LimeError {
 public:
  ParseError(std::size_t offset, const std::string& what)
      : LimeError("parse error at token " + std::to_string(offset) + ": " + what),
        offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

}  // namespace lime
