#pragma once

#include <stdexcept>
#include <string>

namespace nssl {

// Process exit codes shared by the CLI and the C API status values.
enum class ExitCode : int {
  kPass = 0,
  kMonitorFailure = 1,
  kConfigError = 2,
  kNumericalFailure = 3,
};

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual ExitCode exit_code() const noexcept = 0;
};

/// Bad input shape, out-of-range parameter, malformed configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::kConfigError; }
};

/// Input data violates a solvability condition (e.g. nonzero mean for Poisson).
class InconsistentDataError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::kConfigError; }
};

/// NaN/overflow, CFL violation, failed inner iteration, and similar.
class NumericalError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::kNumericalFailure; }
};

class StabilityError : public NumericalError {
 public:
  StabilityError(const std::string& what, double measured)
      : NumericalError(what), measured_(measured) {}
  double measured() const noexcept { return measured_; }

 private:
  double measured_;
};

class NonContractionError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Requested operation lies outside the region where its result is certified.
class CertifiedRegionError : public NumericalError {
 public:
  CertifiedRegionError(const std::string& what, double measured)
      : NumericalError(what), measured_(measured) {}
  double measured() const noexcept { return measured_; }

 private:
  double measured_;
};

class TopologyError : public NumericalError {
 public:
  TopologyError(const std::string& what, double time)
      : NumericalError(what), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

}  // namespace nssl
