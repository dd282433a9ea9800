#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dposim {

enum class ErrorCode {
  NegativeRate,
  ZeroOmega0,
  MalformedDelaySpec,
  Gamma1ZeroWithScaledDelay,
  InvalidArgument,
  SingularDelta,
  NonConvergence,
  GenericPhase,
  ZeroDelay,
  NoRootFound,
  StepTooLarge,
  NonFiniteState,
  DegenerateTrace,
  EmptyGrid,
  ParseError,
  UnknownKey,
  VersionMismatch,
  ConflictingDelaySpec,
  IoError,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NegativeRate: return "NegativeRate";
    case ErrorCode::ZeroOmega0: return "ZeroOmega0";
    case ErrorCode::MalformedDelaySpec: return "MalformedDelaySpec";
    case ErrorCode::Gamma1ZeroWithScaledDelay: return "Gamma1ZeroWithScaledDelay";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::SingularDelta: return "SingularDelta";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::GenericPhase: return "GenericPhase";
    case ErrorCode::ZeroDelay: return "ZeroDelay";
    case ErrorCode::NoRootFound: return "NoRootFound";
    case ErrorCode::StepTooLarge: return "StepTooLarge";
    case ErrorCode::NonFiniteState: return "NonFiniteState";
    case ErrorCode::DegenerateTrace: return "DegenerateTrace";
    case ErrorCode::EmptyGrid: return "EmptyGrid";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::UnknownKey: return "UnknownKey";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    case ErrorCode::ConflictingDelaySpec: return "ConflictingDelaySpec";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

/// Every failure in the library is reported through this exception; `code()`
/// identifies the condition, `what()` carries the human-readable detail.
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

}  // namespace dposim
