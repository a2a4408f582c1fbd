#include "inkmotion/error.hpp"

namespace inkmotion {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::EmptyMask: return "EmptyMask";
    case ErrorCode::SpacingTooCoarse: return "SpacingTooCoarse";
    case ErrorCode::DegenerateBoundary: return "DegenerateBoundary";
    case ErrorCode::RefinementDiverged: return "RefinementDiverged";
    case ErrorCode::InvalidPoisson: return "InvalidPoisson";
    case ErrorCode::NonFiniteState: return "NonFiniteState";
    case ErrorCode::WrongRigKind: return "WrongRigKind";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::TruncatedStream: return "TruncatedStream";
    case ErrorCode::DimensionOverflow: return "DimensionOverflow";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::FileNotFound: return "FileNotFound";
    case ErrorCode::BadImage: return "BadImage";
    case ErrorCode::StaleRevision: return "StaleRevision";
    case ErrorCode::StaleSimulation: return "StaleSimulation";
  }
  return "Unknown";
}

}  // namespace inkmotion
