#pragma once

#include <stdexcept>
#include <string>

namespace quanta {

/// Base class for every error raised by the library. The CLI maps the
/// concrete subclasses onto process exit codes.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
  virtual int exit_code() const noexcept { return 1; }
};

/// Bad or malformed input data (exit code 1).
class InputError : public Error {
public:
  using Error::Error;
  int exit_code() const noexcept override { return 1; }
};

/// Input data that parsed but violates a domain constraint.
class ValidationError : public InputError {
public:
  using InputError::InputError;
};

/// Wall faces along a measurement line that do not pair up.
class PairingError : public InputError {
public:
  using InputError::InputError;
};

/// Degenerate geometry such as coincident corners or points.
class GeometryError : public InputError {
public:
  using InputError::InputError;
};

/// Parameter / configuration outside its valid range (exit code 2).
class ConfigError : public Error {
public:
  using Error::Error;
  int exit_code() const noexcept override { return 2; }
};

/// The analysis ran but has no meaningful answer (exit code 3).
class DegenerateError : public Error {
public:
  using Error::Error;
  int exit_code() const noexcept override { return 3; }
};

} // namespace quanta
