#include "ifl/error.hpp"

#include <fmt/format.h>

namespace ifl {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnresolvedReference: return "UnresolvedReference";
    case ErrorCode::CycleDetected: return "CycleDetected";
    case ErrorCode::TypeMismatch: return "TypeMismatch";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::ValidationFailed: return "ValidationFailed";
    case ErrorCode::ConflictingMetadata: return "ConflictingMetadata";
    case ErrorCode::UnknownClient: return "UnknownClient";
    case ErrorCode::AllZeroMass: return "AllZeroMass";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::DivergenceDetected: return "DivergenceDetected";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NotNormalized: return "NotNormalized";
    case ErrorCode::MissingParams: return "MissingParams";
    case ErrorCode::UnresolvedDevice: return "UnresolvedDevice";
    case ErrorCode::IncompatibleAssignment: return "IncompatibleAssignment";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::MixedModelSpecs: return "MixedModelSpecs";
    case ErrorCode::PrivacyViolation: return "PrivacyViolation";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, std::string subject, const std::string& detail)
    : std::runtime_error(subject.empty()
                             ? fmt::format("{}: {}", to_string(code), detail)
                             : fmt::format("{}({}): {}", to_string(code), subject, detail)),
      code_(code),
      subject_(std::move(subject)) {}

void fail(ErrorCode code, std::string subject, const std::string& detail) {
  throw Error(code, std::move(subject), detail);
}

}  // namespace ifl
