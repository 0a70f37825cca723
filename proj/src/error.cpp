#include "rashdrive/error.hpp"

namespace rashdrive {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidInput: return "invalid-input";
    case ErrorCode::EmptyRegion: return "empty-region";
    case ErrorCode::BehindCamera: return "behind-camera";
    case ErrorCode::Horizon: return "horizon";
    case ErrorCode::NotOnGround: return "not-on-ground";
    case ErrorCode::InsufficientData: return "insufficient-data";
    case ErrorCode::NoConsensus: return "no-consensus";
    case ErrorCode::NoLane: return "no-lane";
    case ErrorCode::Parse: return "parse";
    case ErrorCode::Validation: return "validation";
    case ErrorCode::Io: return "io";
  }
  return "unknown";
}

}  // namespace rashdrive
