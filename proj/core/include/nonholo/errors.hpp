#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace nonholo {

enum class ErrorCode {
  NotAntisymmetric,
  SingularInertia,
  InvalidStep,
  DimensionMismatch,
  NonFiniteState,
  HessianSingular,
  ChartDomain,
  ConstraintViolated,
  NoiseSingular,
  EffectiveMassSingular,
  UnsupportedDependence,
  CflViolation,
  CoverageLow,
  EmptyEnsemble,
  ParseError,
  ValidationError,
  Io,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Exception type used throughout the library. The code is stable and
/// machine readable; the message carries location context.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

  /// True for failures of the numerics (singular systems, blow-ups, CFL)
  /// as opposed to usage or configuration mistakes.
  bool is_numerical() const noexcept;

 private:
  ErrorCode code_;
};

/// Configuration text could not be parsed.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& message);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// A parsed configuration value violates a model invariant.
class ValidationError : public Error {
 public:
  ValidationError(std::string key, const std::string& constraint);
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

}  // namespace nonholo
