#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dlc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed constraint text. Carries the 1-based position of the offending token.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column)
      : Error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

class UnboundVariable : public Error {
 public:
  explicit UnboundVariable(const std::string& name)
      : Error("unbound variable '" + name + "'"), name_(name) {}

  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

/// DL2 has no translation for the negation of a conjunction.
class NnfUnsupported : public Error {
 public:
  using Error::Error;
};

/// Atom oracle mode not usable with the selected semantics.
class OracleMismatch : public Error {
 public:
  using Error::Error;
};

/// Connective input outside the semantics' domain, or a parameter out of range.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Division by zero or overflow to a non-finite value.
class ArithmeticError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace dlc
