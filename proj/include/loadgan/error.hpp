#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace loadgan {

enum class ErrorCode {
  DegenerateWeek,
  DegenerateRange,
  TooShort,
  EmptyInput,
  ClusteringDegenerate,
  BadConfig,
  ShapeMismatch,
  NumericError,
  UnknownLabel,
  ParseError,
  MissingSection,
  TopologyError,
  UnassignedLoad,
  DegenerateProfile,
  Diverged,
  SingularJacobian,
  IoError,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DegenerateWeek: return "DegenerateWeek";
    case ErrorCode::DegenerateRange: return "DegenerateRange";
    case ErrorCode::TooShort: return "TooShort";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::ClusteringDegenerate: return "ClusteringDegenerate";
    case ErrorCode::BadConfig: return "BadConfig";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NumericError: return "NumericError";
    case ErrorCode::UnknownLabel: return "UnknownLabel";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::MissingSection: return "MissingSection";
    case ErrorCode::TopologyError: return "TopologyError";
    case ErrorCode::UnassignedLoad: return "UnassignedLoad";
    case ErrorCode::DegenerateProfile: return "DegenerateProfile";
    case ErrorCode::Diverged: return "Diverged";
    case ErrorCode::SingularJacobian: return "SingularJacobian";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries a machine-readable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace loadgan
