#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ifl {

enum class ErrorCode {
  UnresolvedReference,
  CycleDetected,
  TypeMismatch,
  SchemaMismatch,
  ValidationFailed,
  ConflictingMetadata,
  UnknownClient,
  AllZeroMass,
  EmptyDataset,
  DivergenceDetected,
  DimensionMismatch,
  NotNormalized,
  MissingParams,
  UnresolvedDevice,
  IncompatibleAssignment,
  Infeasible,
  MixedModelSpecs,
  PrivacyViolation,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries a machine-checkable code plus
// the offending identifier (asset id, task id, sample index, ...) when there
// is one.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string subject, const std::string& detail);

  ErrorCode code() const noexcept { return code_; }
  const std::string& subject() const noexcept { return subject_; }

 private:
  ErrorCode code_;
  std::string subject_;
};

[[noreturn]] void fail(ErrorCode code, std::string subject, const std::string& detail);

}  // namespace ifl
