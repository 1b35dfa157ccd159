#pragma once

#include <stdexcept>
#include <string>

namespace frontier_lab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the mathematical domain of the operation
/// (probability outside [0,1], |alpha| >= 1, negative noise scale, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A linear system or regressor has no unique solution.
class SingularityError : public Error {
 public:
  using Error::Error;
};

class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Degenerate inputs: zero signal, collinear constraints, unbounded weights.
class DegenerateError : public Error {
 public:
  using Error::Error;
};

/// Malformed or unreadable input files.
class DataError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace frontier_lab
