#pragma once

#include <stdexcept>
#include <string>

namespace cganseg {

// Base of every error this library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Precondition or argument violations (bad config, out-of-range options).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Tensor shapes, or a network spec, do not agree with what an operation needs.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Malformed on-disk data: checkpoints, rasters, manifests.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Files that cannot be opened or written.
class IoError : public Error {
 public:
  using Error::Error;
};

// A NaN or Inf showed up where finite values are required.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Misuse of the gradient tape (backward twice, non-scalar loss, ...).
class TapeError : public Error {
 public:
  using Error::Error;
};

}  // namespace cganseg
