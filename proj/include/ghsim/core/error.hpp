#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ghsim {

// Every failure the library reports carries one of these codes. The CLI maps
// them onto its exit-code convention via exit_code().
enum class ErrorCode {
  InvalidArgument,
  Io,
  Config,
  UnknownEventType,
  MalformedRecord,
  EmptyWindow,
  UnsupportedEventType,
  InfeasibleBalance,
  UnknownUser,
  InsufficientData,
  EmptyRank,
  NonFinite,
  ConvergenceFailure,
  BetaTooLarge,
  DegenerateTarget,
  BadPersistence,
  DegenerateTruth,
  EmptyCommunity,
  SnapshotMismatch,
  ModelStep,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "Io";
    case ErrorCode::Config: return "Config";
    case ErrorCode::UnknownEventType: return "UnknownEventType";
    case ErrorCode::MalformedRecord: return "MalformedRecord";
    case ErrorCode::EmptyWindow: return "EmptyWindow";
    case ErrorCode::UnsupportedEventType: return "UnsupportedEventType";
    case ErrorCode::InfeasibleBalance: return "InfeasibleBalance";
    case ErrorCode::UnknownUser: return "UnknownUser";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::EmptyRank: return "EmptyRank";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorCode::BetaTooLarge: return "BetaTooLarge";
    case ErrorCode::DegenerateTarget: return "DegenerateTarget";
    case ErrorCode::BadPersistence: return "BadPersistence";
    case ErrorCode::DegenerateTruth: return "DegenerateTruth";
    case ErrorCode::EmptyCommunity: return "EmptyCommunity";
    case ErrorCode::SnapshotMismatch: return "SnapshotMismatch";
    case ErrorCode::ModelStep: return "ModelStep";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

  // 2 = usage/config problem, 3 = data/runtime problem.
  int exit_code() const noexcept {
    switch (code_) {
      case ErrorCode::InvalidArgument:
      case ErrorCode::Config:
      case ErrorCode::InfeasibleBalance:
      case ErrorCode::BetaTooLarge:
      case ErrorCode::BadPersistence:
        return 2;
      default:
        return 3;
    }
  }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace ghsim
