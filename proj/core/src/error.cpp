#include "asmr/error.hpp"

namespace asmr {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::BaseProductMismatch: return "BaseProductMismatch";
    case ErrorCode::RaggedLevels: return "RaggedLevels";
    case ErrorCode::NonPositiveBase: return "NonPositiveBase";
    case ErrorCode::CoordOutOfRange: return "CoordOutOfRange";
    case ErrorCode::LevelValueOutOfRange: return "LevelValueOutOfRange";
    case ErrorCode::LevelOutOfRange: return "LevelOutOfRange";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::BadFactor: return "BadFactor";
    case ErrorCode::BadWidths: return "BadWidths";
    case ErrorCode::LevelCountMismatch: return "LevelCountMismatch";
    case ErrorCode::CorruptCheckpoint: return "CorruptCheckpoint";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    case ErrorCode::InconsistentConfig: return "InconsistentConfig";
    case ErrorCode::ExtentMismatch: return "ExtentMismatch";
    case ErrorCode::NumericFailure: return "NumericFailure";
    case ErrorCode::TooSmall: return "TooSmall";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::TruncatedFile: return "TruncatedFile";
    case ErrorCode::UnsupportedMaxval: return "UnsupportedMaxval";
    case ErrorCode::UnsupportedEncoding: return "UnsupportedEncoding";
    case ErrorCode::TooShort: return "TooShort";
    case ErrorCode::HeaderMismatch: return "HeaderMismatch";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace asmr
