#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace bioreactor {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A configuration value violates a documented constraint.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, std::string constraint)
      : Error(field + ": " + constraint), field_(std::move(field)), constraint_(std::move(constraint)) {}

  const std::string& field() const noexcept { return field_; }
  const std::string& constraint() const noexcept { return constraint_; }

 private:
  std::string field_;
  std::string constraint_;
};

/// The configuration document could not be parsed at all.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, int line, int column)
      : Error("parse error at line " + std::to_string(line + 1) + ", column " +
              std::to_string(column + 1) + ": " + message),
        line_(line),
        column_(column) {}

  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

/// A field became non-finite; treated as solver divergence.
class InvalidStateError : public Error {
 public:
  using Error::Error;
};

/// Linear, nonlinear or eigenvalue iteration failed.
class SolverError : public Error {
 public:
  SolverError(const std::string& message, std::vector<double> history, int step = -1)
      : Error(message), history_(std::move(history)), step_(step) {}

  /// Residual or update norms recorded before the failure.
  const std::vector<double>& history() const noexcept { return history_; }
  /// Time index of the failing step, or -1 when not tied to a step.
  int step() const noexcept { return step_; }

 private:
  std::vector<double> history_;
  int step_;
};

}  // namespace bioreactor
