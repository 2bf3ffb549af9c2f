#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace crlab {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed serialized input (bit strings, rationals, tables, scenarios).
class FormatError : public Error {
 public:
  using Error::Error;
};

// An index or argument outside its documented range.
class RangeError : public Error {
 public:
  using Error::Error;
};

// A bit source was queried past its available length.
class OracleRangeError : public RangeError {
 public:
  explicit OracleRangeError(std::uint64_t index)
      : RangeError("oracle position " + std::to_string(index) +
                   " is out of range"),
        index_(index) {}
  std::uint64_t index() const { return index_; }

 private:
  std::uint64_t index_;
};

// A martingale could not be evaluated on some input.
class EvaluationError : public Error {
 public:
  EvaluationError(std::string input, const std::string& reason)
      : Error("evaluation failed at \"" + input + "\": " + reason),
        input_(std::move(input)) {}
  const std::string& input() const { return input_; }

 private:
  std::string input_;
};

}  // namespace crlab
