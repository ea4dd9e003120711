#pragma once

#include <stdexcept>
#include <string>

namespace tstg {

// Base of every error raised by the library. The C API maps each subclass to
// its own status code.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Invalid argument or mismatched inputs (dimension, epsilon, shape).
class ParameterError : public Error {
public:
  using Error::Error;
};

// A matrix that must be invertible is singular to working precision.
class DegeneracyError : public Error {
public:
  using Error::Error;
};

// Inputs violate a structural relation they are required to satisfy.
class ConsistencyError : public Error {
public:
  using Error::Error;
};

// Invariant residuals exceeded their tolerance during time integration.
class IntegrationError : public Error {
public:
  using Error::Error;
};

// Requested feature is not available for the given input.
class UnsupportedError : public Error {
public:
  using Error::Error;
};

// Result would not be trustworthy (boundary leakage, empty data).
class AccuracyError : public Error {
public:
  using Error::Error;
};

class IoError : public Error {
public:
  using Error::Error;
};

// Run-configuration problem; `path` is the dotted field path, `line` the
// 1-based source line when known (0 otherwise).
class ConfigError : public Error {
public:
  ConfigError(std::string path, int line, const std::string &message)
      : Error(format(path, line, message)), path_(std::move(path)), line_(line) {}

  const std::string &path() const noexcept { return path_; }
  int line() const noexcept { return line_; }

private:
  static std::string format(const std::string &path, int line, const std::string &message) {
    std::string out;
    if (line > 0)
      out += "line " + std::to_string(line) + ": ";
    if (!path.empty())
      out += path + ": ";
    return out + message;
  }

  std::string path_;
  int line_;
};

} // namespace tstg
