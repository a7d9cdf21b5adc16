#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace asmr {

enum class ErrorCode {
  // coords
  BaseProductMismatch,
  RaggedLevels,
  NonPositiveBase,
  CoordOutOfRange,
  LevelValueOutOfRange,
  LevelOutOfRange,
  // tensor
  ShapeMismatch,
  BadFactor,
  // model
  BadWidths,
  LevelCountMismatch,
  CorruptCheckpoint,
  VersionMismatch,
  // profiler
  InconsistentConfig,
  // train
  ExtentMismatch,
  NumericFailure,
  // metrics
  TooSmall,
  // dataio
  BadMagic,
  TruncatedFile,
  UnsupportedMaxval,
  UnsupportedEncoding,
  TooShort,
  HeaderMismatch,
  // cli
  ConfigError,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace asmr
