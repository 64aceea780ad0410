#pragma once

#include <stdexcept>
#include <string>

namespace gml {

// Invalid argument to a generator, statistic or experiment.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A degree sequence could not be realized within the retry budget.
class RealizationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Incompatible matrix shapes at record time or in a model/parameter pairing.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// NaN or Inf produced by a forward pass.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input file; the message carries the 1-based line number.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Well-formed input that violates a graph-set invariant (edge bounds, duplicates).
class ValidationError : public ParseError {
 public:
  using ParseError::ParseError;
};

// Unknown configuration key or value of the wrong type.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace gml
