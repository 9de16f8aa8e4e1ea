#include "rfv/core/error.hpp"

namespace rfv {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDuplicateId: return "DuplicateId";
    case ErrorCode::kInvariantViolation: return "InvariantViolation";
    case ErrorCode::kAreaMismatch: return "AreaMismatch";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kFormatVersionMismatch: return "FormatVersionMismatch";
    case ErrorCode::kCorruptManifest: return "CorruptManifest";
    case ErrorCode::kNoContactFound: return "NoContactFound";
    case ErrorCode::kInsufficientPoints: return "InsufficientPoints";
    case ErrorCode::kTooFewPoints: return "TooFewPoints";
    case ErrorCode::kNonMonotonicTime: return "NonMonotonicTime";
    case ErrorCode::kEmptyBitmap: return "EmptyBitmap";
    case ErrorCode::kEmptyText: return "EmptyText";
    case ErrorCode::kDimMismatch: return "DimMismatch";
    case ErrorCode::kEmptyIndex: return "EmptyIndex";
    case ErrorCode::kRTooLarge: return "RTooLarge";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kEmptyDataset: return "EmptyDataset";
    case ErrorCode::kExpertFailure: return "ExpertFailure";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kConfigError: return "ConfigError";
    case ErrorCode::kNotFound: return "NotFound";
  }
  return "Unknown";
}

}  // namespace rfv
