#pragma once

#include <stdexcept>
#include <string>

namespace srl {

/// Base class for all toolkit errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Malformed model/query text. Carries a 1-based line/column.
struct ParseError : Error {
  int line;
  int column;
  ParseError(const std::string& msg, int line_, int column_)
      : Error(msg + " (line " + std::to_string(line_) + ", column " +
              std::to_string(column_) + ")"),
        line(line_),
        column(column_) {}
};

/// A model violates a structural invariant (bad sorts, cycles, ...).
struct ValidationError : Error {
  using Error::Error;
};

/// A feasibility cap was exceeded (state space, arity, proposition count).
struct CapError : Error {
  using Error::Error;
};

/// Numeric failure: conditioning on zero-probability evidence and the like.
struct NumericError : Error {
  using Error::Error;
};

}  // namespace srl
