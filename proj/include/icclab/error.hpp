#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace icclab {

enum class ErrorCode {
  InconsistentSymmetry,
  BianchiViolation,
  DimMismatch,
  SingularTransform,
  NonpositiveDenominator,
  BadClass,
  NonOrthonormalFrame,
  NotStrictlyPIC,
  NonpositiveEps,
  NonpositiveScal,
  PreconditionFailed,
  NotNearBoundary,
  ZeroScal,
  InvalidArgument,
  ParseError,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InconsistentSymmetry: return "InconsistentSymmetry";
    case ErrorCode::BianchiViolation: return "BianchiViolation";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::SingularTransform: return "SingularTransform";
    case ErrorCode::NonpositiveDenominator: return "NonpositiveDenominator";
    case ErrorCode::BadClass: return "BadClass";
    case ErrorCode::NonOrthonormalFrame: return "NonOrthonormalFrame";
    case ErrorCode::NotStrictlyPIC: return "NotStrictlyPIC";
    case ErrorCode::NonpositiveEps: return "NonpositiveEps";
    case ErrorCode::NonpositiveScal: return "NonpositiveScal";
    case ErrorCode::PreconditionFailed: return "PreconditionFailed";
    case ErrorCode::NotNearBoundary: return "NotNearBoundary";
    case ErrorCode::ZeroScal: return "ZeroScal";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

/// Exception type for every contract violation raised by the library. The
/// code identifies the failure class so callers (and tests) can branch on it.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace icclab
