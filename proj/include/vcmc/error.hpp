#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vcmc {

enum class ErrorCode {
  kFormat,            // wrong color format / plane layout for the operation
  kArgument,          // bad scalar argument (dims, qp, factors)
  kDimensionMismatch,
  kBadMagic,
  kTruncated,
  kTrailingData,
  kCorruptPayload,
  kConfig,
  kProcess,           // external process failed or timed out
  kIo,
  kSizeMismatch,      // raw file size inconsistent with the declared layout
  kMalformedJson,
  kMissingKey,
  kUnknownKey,
  kTypeMismatch,
  kNonpositiveExtent,
  kConstraint,
  kInsufficientPoints,
  kDisjointRange,
  kMissingDetections,
};

inline std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kFormat: return "format_error";
    case ErrorCode::kArgument: return "argument_error";
    case ErrorCode::kDimensionMismatch: return "dimension_mismatch";
    case ErrorCode::kBadMagic: return "bad_magic";
    case ErrorCode::kTruncated: return "truncated_payload";
    case ErrorCode::kTrailingData: return "trailing_garbage";
    case ErrorCode::kCorruptPayload: return "corrupt_payload";
    case ErrorCode::kConfig: return "config_error";
    case ErrorCode::kProcess: return "process_error";
    case ErrorCode::kIo: return "io_error";
    case ErrorCode::kSizeMismatch: return "size_mismatch";
    case ErrorCode::kMalformedJson: return "malformed_json";
    case ErrorCode::kMissingKey: return "missing_key";
    case ErrorCode::kUnknownKey: return "unknown_key";
    case ErrorCode::kTypeMismatch: return "type_mismatch";
    case ErrorCode::kNonpositiveExtent: return "nonpositive_extent";
    case ErrorCode::kConstraint: return "constraint_violation";
    case ErrorCode::kInsufficientPoints: return "insufficient points";
    case ErrorCode::kDisjointRange: return "disjoint_quality_range";
    case ErrorCode::kMissingDetections: return "missing_detections";
  }
  return "unknown_error";
}

// All library failures are reported through this one exception type; callers
// dispatch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
        code_(code),
        message_(message) {}

  ErrorCode code() const noexcept { return code_; }
  // The message without the code prefix.
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorCode code_;
  std::string message_;
};

}  // namespace vcmc
