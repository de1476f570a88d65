#pragma once

#include <stdexcept>
#include <string>

namespace truncq {

enum class ErrorCode {
  InvalidInput,
  NumericalFailure,
  Unsupported,
  Infeasible,
  CombinatorialBlowup,
  DeltaOutOfRange,
  BetaOutOfRange,
  WhichMismatch,
  TrivialNullSpace,
  Io,
};

const char* to_string(ErrorCode code);

/// Exception carrying a machine-readable error category.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidInput: return "InvalidInput";
    case ErrorCode::NumericalFailure: return "NumericalFailure";
    case ErrorCode::Unsupported: return "Unsupported";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::CombinatorialBlowup: return "CombinatorialBlowup";
    case ErrorCode::DeltaOutOfRange: return "DeltaOutOfRange";
    case ErrorCode::BetaOutOfRange: return "BetaOutOfRange";
    case ErrorCode::WhichMismatch: return "WhichMismatch";
    case ErrorCode::TrivialNullSpace: return "TrivialNullSpace";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

inline void require(bool condition, ErrorCode code, const std::string& what) {
  if (!condition) throw Error(code, what);
}

}  // namespace truncq
