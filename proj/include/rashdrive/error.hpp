#pragma once

#include <stdexcept>
#include <string>

namespace rashdrive {

enum class ErrorCode {
  InvalidInput = 1,
  EmptyRegion,
  BehindCamera,
  Horizon,
  NotOnGround,
  InsufficientData,
  NoConsensus,
  NoLane,
  Parse,
  Validation,
  Io,
};

const char* to_string(ErrorCode code) noexcept;

// All recoverable failures in the library are reported through this type.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void require(bool condition, const std::string& message) {
  if (!condition) fail(ErrorCode::InvalidInput, message);
}

}  // namespace rashdrive
