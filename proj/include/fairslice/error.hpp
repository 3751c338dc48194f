#pragma once

#include <stdexcept>
#include <string>

namespace fairslice {

enum class ErrorCode {
  MalformedNumber,
  MalformedDocument,
  NonIncreasingBreakpoints,
  NegativeValue,
  AllZeroDensity,
  EmptyProfile,
  DuplicateAgent,
  NonPositiveClaim,
  NothingDesired,
  FractionOverflow,
  InfeasibleInput,
  Unbounded,
  NoConvergence,
  DegenerateAgent,
  InsufficientCake,
  TooManyAgents,
  InvalidPermutation,
  InvalidArgument,
  Internal,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedNumber: return "MalformedNumber";
    case ErrorCode::MalformedDocument: return "MalformedDocument";
    case ErrorCode::NonIncreasingBreakpoints: return "NonIncreasingBreakpoints";
    case ErrorCode::NegativeValue: return "NegativeValue";
    case ErrorCode::AllZeroDensity: return "AllZeroDensity";
    case ErrorCode::EmptyProfile: return "EmptyProfile";
    case ErrorCode::DuplicateAgent: return "DuplicateAgent";
    case ErrorCode::NonPositiveClaim: return "NonPositiveClaim";
    case ErrorCode::NothingDesired: return "NothingDesired";
    case ErrorCode::FractionOverflow: return "FractionOverflow";
    case ErrorCode::InfeasibleInput: return "InfeasibleInput";
    case ErrorCode::Unbounded: return "Unbounded";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::DegenerateAgent: return "DegenerateAgent";
    case ErrorCode::InsufficientCake: return "InsufficientCake";
    case ErrorCode::TooManyAgents: return "TooManyAgents";
    case ErrorCode::InvalidPermutation: return "InvalidPermutation";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Internal: return "Internal";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace fairslice
