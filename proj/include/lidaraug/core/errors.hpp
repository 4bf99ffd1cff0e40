#pragma once

#include <stdexcept>
#include <string>

namespace lidaraug {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed or unreadable input data (bad magic, truncated file,
/// unsupported encoding, missing file). CLI exit code 2.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// A contract violation on otherwise well-formed input (missing channel,
/// count mismatch, unknown class). CLI exit code 3.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Input outside the mathematical domain of an operation
/// (zero-length vector, non-unit direction, object at the sensor origin).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Point set too degenerate for a geometric fit (collinear, coplanar).
class DegenerateGeometryError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Ground estimation had too little support to fit a plane.
class NoGroundError : public Error {
 public:
  using Error::Error;
};

}  // namespace lidaraug
