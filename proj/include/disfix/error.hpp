#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace disfix {

/// Base class for every error thrown by this library.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Expression source could not be parsed. Carries the byte offset of the
/// first offending character (end of input for truncated sources).
class ParseError : public Error {
public:
  ParseError(std::size_t offset, const std::string& message)
      : Error(message + " (byte offset " + std::to_string(offset) + ")"),
        offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

private:
  std::size_t offset_;
};

/// Evaluation failed: unbound variable, division by zero, sqrt of a
/// negative, or a value with the wrong sign for its role. The message
/// names the offending node.
class EvalError : public Error {
public:
  using Error::Error;
};

/// A point fell outside the problem domain, or a map escaped it.
class DomainError : public Error {
public:
  using Error::Error;
};

/// A problem file or configuration value is malformed. The message names
/// the offending key.
class ConfigError : public Error {
public:
  using Error::Error;
};

/// Adaptive quadrature could not meet its error budget within max_depth.
class QuadratureError : public Error {
public:
  using Error::Error;
};

}  // namespace disfix
