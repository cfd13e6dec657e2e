#include "spoofres/error.hpp"

namespace spoofres {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonSimpleSpectrum: return "NonSimpleSpectrum";
    case ErrorCode::ComplexSpectrum: return "ComplexSpectrum";
    case ErrorCode::SingularPsi: return "SingularPsi";
    case ErrorCode::PsiNotDiagonalizing: return "PsiNotDiagonalizing";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::EmptySubset: return "EmptySubset";
    case ErrorCode::EmptySourceSet: return "EmptySourceSet";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::WindowExceedsHorizon: return "WindowExceedsHorizon";
    case ErrorCode::NotSchurStable: return "NotSchurStable";
    case ErrorCode::PlacementFailed: return "PlacementFailed";
    case ErrorCode::EmptyRetainedSet: return "EmptyRetainedSet";
    case ErrorCode::InsufficientParents: return "InsufficientParents";
    case ErrorCode::CycleDetected: return "CycleDetected";
    case ErrorCode::CapacityExceeded: return "CapacityExceeded";
    case ErrorCode::NoSuchEdge: return "NoSuchEdge";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace spoofres
