#include "facespace/error.hpp"

namespace facespace {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::CountMismatch: return "CountMismatch";
    case ErrorCode::MagicMismatch: return "MagicMismatch";
    case ErrorCode::TruncatedFile: return "TruncatedFile";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::InvalidMetadata: return "InvalidMetadata";
    case ErrorCode::DimTooSmall: return "DimTooSmall";
    case ErrorCode::UnknownIdentity: return "UnknownIdentity";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::PerplexityTooLarge: return "PerplexityTooLarge";
    case ErrorCode::NonFiniteDistance: return "NonFiniteDistance";
    case ErrorCode::NotNormalized: return "NotNormalized";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::SvdNoConvergence: return "SvdNoConvergence";
    case ErrorCode::SingleClass: return "SingleClass";
    case ErrorCode::TooFewIdentities: return "TooFewIdentities";
    case ErrorCode::FoldMissingClass: return "FoldMissingClass";
    case ErrorCode::EmptySlice: return "EmptySlice";
    case ErrorCode::EmptyDistribution: return "EmptyDistribution";
    case ErrorCode::MissingVeridical: return "MissingVeridical";
    case ErrorCode::DegenerateData: return "DegenerateData";
    case ErrorCode::SliceTooSmall: return "SliceTooSmall";
    case ErrorCode::MismatchedIds: return "MismatchedIds";
    case ErrorCode::EmptyCurveList: return "EmptyCurveList";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

ErrorCategory category(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidConfig:
    case ErrorCode::InvalidArgument:
      return ErrorCategory::Usage;
    case ErrorCode::NonFiniteDistance:
    case ErrorCode::NonFinite:
    case ErrorCode::SvdNoConvergence:
    case ErrorCode::DegenerateData:
      return ErrorCategory::Numerical;
    default:
      return ErrorCategory::Data;
  }
}

}  // namespace facespace
