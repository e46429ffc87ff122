#pragma once

#include <stdexcept>
#include <string>

namespace desync {

// Base for everything the library throws. Each subclass maps to one CLI exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Precondition on a scalar argument (n < 2, T <= 0, parity mismatch, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// A state that is not a valid point of the gap simplex (non-positive gap,
// duplicate phases, wrong sum).
class DegenerateStateError : public Error {
 public:
  using Error::Error;
};

// An update drove some gap to zero or below.
class OvershootError : public Error {
 public:
  OvershootError(const std::string& what, std::size_t gap_index, double value)
      : Error(what), gap_index_(gap_index), value_(value) {}
  std::size_t gap_index() const noexcept { return gap_index_; }
  double value() const noexcept { return value_; }

 private:
  std::size_t gap_index_;
  double value_;
};

class UnsupportedSizeError : public DomainError {
 public:
  using DomainError::DomainError;
};

// Eigensolver non-convergence and similar.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Raised by the finite-difference oracle when the probed map throws.
class ProbeError : public Error {
 public:
  ProbeError(const std::string& what, std::size_t column)
      : Error(what), column_(column) {}
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t column_;
};

// Inconsistent topology / perception / simulation settings, malformed input files.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  IoError(const std::string& what, std::string path)
      : Error(what + ": " + path), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace desync
