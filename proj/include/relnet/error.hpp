#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace relnet {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text. Carries a 1-based line/column when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t line, std::size_t column)
      : Error("line " + std::to_string(line) + ":" + std::to_string(column) +
              ": " + message),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// Arity or schema violations, unsafe rules, bad dialect choices.
class SchemaError : public Error {
 public:
  using Error::Error;
};

/// An operation was invoked outside its precondition.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

}  // namespace relnet
