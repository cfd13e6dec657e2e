#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace spoofres {

enum class ErrorCode {
  NonSimpleSpectrum,
  ComplexSpectrum,
  SingularPsi,
  PsiNotDiagonalizing,
  DimensionMismatch,
  EmptySubset,
  EmptySourceSet,
  TooLarge,
  WindowExceedsHorizon,
  NotSchurStable,
  PlacementFailed,
  EmptyRetainedSet,
  InsufficientParents,
  CycleDetected,
  CapacityExceeded,
  NoSuchEdge,
  ConfigInvalid,
  ParseError,
  IoError,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Raised by config loading; carries the JSON path of the offending field.
class ValidationError : public Error {
 public:
  ValidationError(std::string field, const std::string& what)
      : Error(ErrorCode::ConfigInvalid, field + ": " + what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace spoofres
