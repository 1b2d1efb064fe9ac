#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace realqe {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed textual input. Line and column are 1-based.
class SyntaxError : public Error {
public:
  SyntaxError(const std::string& what, std::size_t line, std::size_t column)
      : Error("syntax error at " + std::to_string(line) + ":" + std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

private:
  std::size_t line_;
  std::size_t column_;
};

/// A configurable resource cap (monomial count, branch nodes) was hit.
class BudgetExceeded : public Error {
public:
  using Error::Error;
};

/// A precondition on the arguments of an operation does not hold.
class DomainError : public Error {
public:
  using Error::Error;
};

/// Resource caps shared by the symbolic pipelines.
struct Limits {
  std::size_t max_monomials = 1'000'000;
  std::size_t max_nodes = 100'000;
  std::size_t max_table_rows = 1'000;
};

}  // namespace realqe
