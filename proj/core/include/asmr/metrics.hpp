#pragma once

#include <cstddef>
#include <optional>
#include <span>

#include "asmr/dataio.hpp"

namespace asmr {

/// PSNR reported for identical inputs.
inline constexpr double kPsnrCap = 200.0;

/// 10 log10(peak^2 / mse), or kPsnrCap when mse == 0. Throws Error{ShapeMismatch}.
double psnr(std::span<const double> pred, std::span<const double> target, double peak);
double psnr_from_mse(double mse, double peak) noexcept;

struct SsimOptions {
  std::size_t window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double data_range = 1.0;
};

/// Mean SSIM over all fully contained Gaussian windows of an
/// [height, width, channels] image; channels are averaged.
/// Throws Error{ShapeMismatch | TooSmall}.
double ssim(std::span<const double> pred, std::span<const double> target, std::size_t height, std::size_t width,
            std::size_t channels = 1, const SsimOptions& options = {});

/// Normalized 1-D Gaussian taps used by ssim().
std::vector<double> gaussian_window(std::size_t size, double sigma);

/// |A and B| / |A or B| with values >= threshold counted as occupied; 1 when both are empty.
double iou(std::span<const double> pred, std::span<const double> target, double threshold = 0.5);

struct QualityReport {
  double psnr = 0.0;
  std::optional<double> ssim;  // 2-D grids only
  std::optional<double> iou;
};

/// PSNR at the target's peak; SSIM on 2-D grids large enough for the window,
/// with data range = peak; IoU when `with_iou`, thresholding at half the peak.
QualityReport evaluate(const Grid& pred, const Grid& target, bool with_iou = false);

}  // namespace asmr
