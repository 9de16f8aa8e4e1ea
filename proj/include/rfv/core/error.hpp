#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rfv {

enum class ErrorCode {
  kDuplicateId,
  kInvariantViolation,
  kAreaMismatch,
  kIoError,
  kFormatVersionMismatch,
  kCorruptManifest,
  kNoContactFound,
  kInsufficientPoints,
  kTooFewPoints,
  kNonMonotonicTime,
  kEmptyBitmap,
  kEmptyText,
  kDimMismatch,
  kEmptyIndex,
  kRTooLarge,
  kShapeMismatch,
  kEmptyDataset,
  kExpertFailure,
  kInvalidArgument,
  kConfigError,
  kNotFound,
};

std::string_view error_code_name(ErrorCode code);

// All library failures surface as rfv::Error; `code()` is the machine-readable
// kind and what() carries the detail (e.g. the failing invariant name).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + detail),
        code_(code),
        detail_(detail) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace rfv
