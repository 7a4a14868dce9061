#include "nonholo/errors.hpp"

namespace nonholo {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NotAntisymmetric: return "NotAntisymmetric";
    case ErrorCode::SingularInertia: return "SingularInertia";
    case ErrorCode::InvalidStep: return "InvalidStep";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonFiniteState: return "NonFiniteState";
    case ErrorCode::HessianSingular: return "HessianSingular";
    case ErrorCode::ChartDomain: return "ChartDomain";
    case ErrorCode::ConstraintViolated: return "ConstraintViolated";
    case ErrorCode::NoiseSingular: return "NoiseSingular";
    case ErrorCode::EffectiveMassSingular: return "EffectiveMassSingular";
    case ErrorCode::UnsupportedDependence: return "UnsupportedDependence";
    case ErrorCode::CflViolation: return "CFLViolation";
    case ErrorCode::CoverageLow: return "CoverageLow";
    case ErrorCode::EmptyEnsemble: return "EmptyEnsemble";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

bool Error::is_numerical() const noexcept {
  switch (code_) {
    case ErrorCode::NonFiniteState:
    case ErrorCode::HessianSingular:
    case ErrorCode::ChartDomain:
    case ErrorCode::NoiseSingular:
    case ErrorCode::EffectiveMassSingular:
    case ErrorCode::CflViolation:
    case ErrorCode::CoverageLow:
    case ErrorCode::ConstraintViolated:
      return true;
    default:
      return false;
  }
}

ParseError::ParseError(std::size_t line, const std::string& message)
    : Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": " + message), line_(line) {}

ValidationError::ValidationError(std::string key, const std::string& constraint)
    : Error(ErrorCode::ValidationError, key + ": " + constraint), key_(std::move(key)) {}

}  // namespace nonholo
