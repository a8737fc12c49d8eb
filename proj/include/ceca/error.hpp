#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ceca {

// Bad flags, unknown attributes, inconsistent roles or degenerate splits.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input data (CSV schema, unparseable rows, corrupt model files).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A CSV row that could not be parsed; line is 1-based and counts the header.
class RowError : public DataError {
 public:
  RowError(std::size_t line, const std::string& what)
      : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// The observations have zero probability under the model. slice is 0-based.
class ImpossibleEvidence : public std::runtime_error {
 public:
  explicit ImpossibleEvidence(std::size_t slice)
      : std::runtime_error("impossible evidence at slice " +
                           std::to_string(slice + 1)),
        slice_(slice) {}
  std::size_t slice() const { return slice_; }

 private:
  std::size_t slice_;
};

}  // namespace ceca
