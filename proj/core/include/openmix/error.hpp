#pragma once

#include <stdexcept>
#include <string>

namespace openmix {

/// Base class for every error raised by the workbench. `kind()` is a short
/// machine-readable tag used by the CLI for its one-line error output.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

/// Operand shapes do not agree.
class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& message) : Error("dimension", message) {}
};

/// A numeric parameter is outside its admissible range.
class ParameterError : public Error {
 public:
  explicit ParameterError(const std::string& message) : Error("parameter", message) {}
};

/// A value violates a type invariant (e.g. a soft label that is not a distribution).
class InvariantError : public Error {
 public:
  explicit InvariantError(const std::string& message) : Error("invariant", message) {}
};

/// Malformed text input. Carries the 1-based line number, 0 when not applicable.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t line)
      : Error("parse", line ? "line " + std::to_string(line) + ": " + message : message),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Malformed binary input (checkpoints).
class FormatError : public Error {
 public:
  explicit FormatError(const std::string& message) : Error("format", message) {}
};

/// Caller asked for something the operation cannot provide (empty inputs, etc.).
class UsageError : public Error {
 public:
  explicit UsageError(const std::string& message) : Error("usage", message) {}
};

/// A metric is mathematically undefined for the given records.
class UndefinedMetricError : public Error {
 public:
  explicit UndefinedMetricError(const std::string& message) : Error("undefined-metric", message) {}
};

/// Invalid experiment configuration.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& message) : Error("config", message) {}
};

}  // namespace openmix
