#pragma once

#include <stdexcept>
#include <string>

namespace qmkit {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed user input: words, specs, group files, option values.
class ParseError : public Error {
 public:
  using Error::Error;
};

// The operation is not defined for this model or argument.
class Unsupported : public Error {
 public:
  using Error::Error;
};

// A configured vertex/path/quadruple budget would be exceeded.
class BudgetExceeded : public Error {
 public:
  BudgetExceeded(const std::string& what, unsigned long long required)
      : Error(what), required_(required) {}
  unsigned long long required() const noexcept { return required_; }

 private:
  unsigned long long required_;
};

// A distance or geodesic was requested where the ball cannot certify it.
class UnreliableDistance : public Error {
 public:
  using Error::Error;
};

// A search reached the edge of the materialized region before it could
// certify its answer.
class BoundaryHit : public Error {
 public:
  using Error::Error;
};

// A semi-decision could not decide within its bounds.
class Inconclusive : public Error {
 public:
  using Error::Error;
};

}  // namespace qmkit
