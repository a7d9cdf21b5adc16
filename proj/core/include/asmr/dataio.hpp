#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "asmr/tensor.hpp"

namespace asmr {

/// Signal sampled on a regular grid, in its native value range.
///
/// Unsigned data (8-bit images, occupancy) lives in [0, peak]; signed data
/// (audio) lives in [-peak, peak]. Values are row-major with channels last.
struct Grid {
  std::vector<std::int64_t> extents;
  std::size_t channels = 1;
  std::vector<double> values;
  double peak = 255.0;
  bool is_signed = false;

  [[nodiscard]] std::size_t dims() const noexcept { return extents.size(); }
  [[nodiscard]] std::int64_t points() const noexcept;

  /// Throws Error{HeaderMismatch} if the value count disagrees with the shape.
  void validate() const;

  /// Values mapped to [-1, 1], shaped [extents..., channels].
  [[nodiscard]] Tensor normalized() const;
  /// Inverse of normalized(); `like` supplies extents, channels and range.
  static Grid denormalize(const Tensor& t, const Grid& like);
};

/// Centered crop to `extents` (each no larger than the current extent).
Grid crop_center(const Grid& grid, const std::vector<std::int64_t>& extents);

/// Binary PGM (P5) / PPM (P6) with maxval 255. Extents are [height, width].
/// Throws Error{BadMagic | TruncatedFile | UnsupportedMaxval}.
Grid read_pnm(const std::filesystem::path& path);
Grid read_pgm(const std::filesystem::path& path);
Grid read_ppm(const std::filesystem::path& path);
/// Values are rounded and clamped to [0, 255].
void write_pgm(const Grid& grid, const std::filesystem::path& path);
void write_ppm(const Grid& grid, const std::filesystem::path& path);

/// PCM16 mono WAV. Keeps the first `max_samples` samples (all when 0), scaled
/// by 1/32768. Throws Error{BadMagic | TruncatedFile | UnsupportedEncoding | TooShort}.
Grid read_wav(const std::filesystem::path& path, std::size_t max_samples = 32000);
void write_wav(const Grid& grid, const std::filesystem::path& path, std::uint32_t sample_rate = 16000);

/// Magic "GRID1", u32 LE dims, u32 LE extents, u32 LE channels, f64 LE payload.
/// Loaded grids are unsigned with peak 1. Throws Error{BadMagic | TruncatedFile | HeaderMismatch}.
Grid read_raw_grid(const std::filesystem::path& path);
void write_raw_grid(const Grid& grid, const std::filesystem::path& path);

/// Dispatch on extension: .pgm/.ppm/.pnm, .wav, .grid.
Grid read_grid_file(const std::filesystem::path& path);
void write_grid_file(const Grid& grid, const std::filesystem::path& path);

}  // namespace asmr
