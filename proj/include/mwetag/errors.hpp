#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mwetag {

/// Tensor shapes that do not line up for an operation.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A forward op produced NaN or Inf.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed IOB tag sequence or span set.
class IobError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Corpus file syntax error. `line()` is 1-based.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Checkpoint or model/config mismatch.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Sentence longer than a model can accept.
class LengthError : public std::length_error {
 public:
  using std::length_error::length_error;
};

}  // namespace mwetag
