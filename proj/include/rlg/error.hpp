#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rlg {

enum class ErrorCode {
  DimensionMismatch,
  InvalidArgument,
  NonFinite,
  SingularSchedule,
  UnsupportedReward,
  DivergentTilt,
  Divergence,
  ShapeMismatch,
  EmptyInput,
  Unsupported,
  Parse,
  Io,
};

std::string_view to_string(ErrorCode code);

// All library failures surface as this type; `code()` is the stable part,
// the message carries context for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "dimension mismatch";
    case ErrorCode::InvalidArgument: return "invalid argument";
    case ErrorCode::NonFinite: return "non-finite value";
    case ErrorCode::SingularSchedule: return "singular schedule";
    case ErrorCode::UnsupportedReward: return "unsupported reward";
    case ErrorCode::DivergentTilt: return "divergent tilt";
    case ErrorCode::Divergence: return "trajectory diverged";
    case ErrorCode::ShapeMismatch: return "shape mismatch";
    case ErrorCode::EmptyInput: return "empty input";
    case ErrorCode::Unsupported: return "unsupported";
    case ErrorCode::Parse: return "parse error";
    case ErrorCode::Io: return "i/o error";
  }
  return "unknown";
}

}  // namespace rlg
