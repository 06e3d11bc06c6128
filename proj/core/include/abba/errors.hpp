#pragma once

#include <stdexcept>
#include <string>

namespace abba {

/// Base class for all engine errors. The CLI maps each subclass to an exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input file could not be parsed, or a field holds an illegal value.
class MalformedInput : public Error {
 public:
  using Error::Error;
};

/// Well-formed input that cannot be fitted or summarized (e.g. an empty arm).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// No finite starting point found for a chain.
class InitializationError : public Error {
 public:
  using Error::Error;
};

/// Too many replicate fits failed during a simulation run.
class ReplicateFailure : public Error {
 public:
  using Error::Error;
};

/// Intercept calibration did not reach its tolerance.
class CalibrationError : public Error {
 public:
  using Error::Error;
};

}  // namespace abba
