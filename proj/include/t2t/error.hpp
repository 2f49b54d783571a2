#pragma once

#include <stdexcept>
#include <string>

namespace t2t {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input data, unreadable files, bad checkpoints.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration or arguments.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Incompatible tensor shapes.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Non-finite loss or gradient, failed gradient check.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace t2t
