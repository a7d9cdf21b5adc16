#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "asmr/error.hpp"
#include "asmr/train.hpp"

namespace asmr::cli {

/// Process exit codes.
enum ExitCode : int {
  kOk = 0,
  kConfigError = 2,
  kDataError = 3,
  kNumericFailure = 4,
};

int exit_code_for(ErrorCode code) noexcept;

/// One experiment: model architecture, training schedule and data paths.
struct ExperimentConfig {
  std::string name;              // label for comparison tables; derived when empty
  std::string model = "asmr";    // asmr | siren
  std::vector<std::size_t> widths;  // empty: [d, 256, 256, 256, channels]
  double omega0 = 30.0;
  std::string scheme;            // coords textual form; a single axis applies to every axis
  TrainConfig train;
  std::filesystem::path input;
  std::filesystem::path out = "out";
  bool crop_to_factorable = false;
  std::uint64_t checkpoint_every = 0;  // 0: final checkpoint only
  std::size_t wav_samples = 32000;

  /// Applies `key=value` pairs; unknown keys throw Error{ConfigError}.
  void apply(const std::map<std::string, std::string>& kv);
};

/// Flat `key=value` text; '#' starts a comment. Throws Error{ConfigError}.
std::map<std::string, std::string> parse_key_values(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

std::vector<std::size_t> parse_widths(const std::string& text);

/// Entry point shared by the executable and the tests.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace asmr::cli
