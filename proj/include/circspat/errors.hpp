#pragma once

#include <stdexcept>
#include <string>

namespace circspat {

// Base class for everything this library throws on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad caller input: out-of-range values, inconsistent shapes, invalid config.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// A computation that requires at least one element received none.
class EmptyInput : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

// Row-addressed problems while reading CSV or config files.
class IngestionError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

// The mean direction (or an angle from a zero vector) does not exist.
class UndefinedDirection : public Error {
 public:
  using Error::Error;
};

// A matrix that must be symmetric positive definite failed to factor, or is
// too ill-conditioned to trust.
class FactorizationError : public Error {
 public:
  using Error::Error;
};

// A sampler could not start: the initial log posterior is not finite.
class InitializationError : public Error {
 public:
  using Error::Error;
};

}  // namespace circspat
