#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace entreg {

/// Base class for every error thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A probability vector failed validation (negative entry, bad sum, n < 2).
class InvalidDistribution : public Error {
 public:
  using Error::Error;
};

/// A hyperparameter or argument is outside its documented range.
class InvalidParameter : public Error {
 public:
  using Error::Error;
};

/// KL-type divergence requested where the second argument has a zero where
/// the first has mass. Raised instead of returning +inf so callers fail loudly.
class AbsoluteContinuityViolation : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class LengthMismatch : public Error {
 public:
  using Error::Error;
};

class EmptyInput : public Error {
 public:
  using Error::Error;
};

class InvalidArchitecture : public Error {
 public:
  using Error::Error;
};

/// Training produced a non-finite loss; carries the iteration it happened at.
class NonFiniteLoss : public Error {
 public:
  NonFiniteLoss(std::size_t iteration, const std::string& what)
      : Error(what), iteration_(iteration) {}
  std::size_t iteration() const noexcept { return iteration_; }

 private:
  std::size_t iteration_;
};

/// Malformed text input; row/column are 1-based (0 when not applicable).
class ParseError : public Error {
 public:
  ParseError(std::size_t row, std::size_t column, const std::string& what)
      : Error(what), row_(row), column_(column) {}
  explicit ParseError(const std::string& what) : ParseError(0, 0, what) {}
  std::size_t row() const noexcept { return row_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::size_t column_;
};

class LabelRangeError : public Error {
 public:
  using Error::Error;
};

class ClassTooSmall : public Error {
 public:
  using Error::Error;
};

/// Experiment configuration problem; message names the offending key.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace entreg
