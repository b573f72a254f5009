#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nmlsdr {

enum class ErrorKind {
  kInvalidInput,
  kDegenerateGraph,
  kConvergence,
  kNumeric,
  kUndefinedMetric,
  kParse,
  kIo,
  kConfig,
};

const char* ErrorKindName(ErrorKind kind);

// Process exit code for the CLI: 2 config, 3 data, 4 numeric.
int ExitCodeFor(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

class InvalidInputError : public Error {
 public:
  explicit InvalidInputError(const std::string& message)
      : Error(ErrorKind::kInvalidInput, message) {}
};

// Raised for isolated nodes; the caller should raise k or sigma.
class DegenerateGraphError : public Error {
 public:
  explicit DegenerateGraphError(const std::string& message)
      : Error(ErrorKind::kDegenerateGraph, message) {}
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& message, Eigen::MatrixXd last_iterate,
                   double residual, int iterations)
      : Error(ErrorKind::kConvergence, message),
        last_iterate_(std::move(last_iterate)),
        residual_(residual),
        iterations_(iterations) {}

  const Eigen::MatrixXd& last_iterate() const { return last_iterate_; }
  double residual() const { return residual_; }
  int iterations() const { return iterations_; }

 private:
  Eigen::MatrixXd last_iterate_;
  double residual_;
  int iterations_;
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& message)
      : Error(ErrorKind::kNumeric, message) {}
};

class UndefinedMetricError : public Error {
 public:
  explicit UndefinedMetricError(const std::string& message)
      : Error(ErrorKind::kUndefinedMetric, message) {}
};

class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t line)
      : Error(ErrorKind::kParse,
              "line " + std::to_string(line) + ": " + message),
        line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& message) : Error(ErrorKind::kIo, message) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& message)
      : Error(ErrorKind::kConfig, message) {}
};

// A failure inside one experiment cell. Keeps the kind of the underlying
// error and a JSON snapshot of the config that produced it.
class ExperimentError : public Error {
 public:
  ExperimentError(ErrorKind kind, const std::string& message,
                  std::string config_snapshot)
      : Error(kind, message), config_snapshot_(std::move(config_snapshot)) {}

  const std::string& config_snapshot() const { return config_snapshot_; }

 private:
  std::string config_snapshot_;
};

}  // namespace nmlsdr
