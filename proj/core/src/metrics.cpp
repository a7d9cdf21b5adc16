#include "asmr/metrics.hpp"

#include <cmath>
#include <vector>

#include "asmr/error.hpp"

namespace asmr {

namespace {

void require_same_size(std::span<const double> a, std::span<const double> b, const char* what) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::ShapeMismatch, std::string(what) + ": " + std::to_string(a.size()) + " vs " +
                                              std::to_string(b.size()) + " values");
  }
}

// Valid-mode separable filter of one channel: rows first, then columns.
std::vector<double> filter_valid(const std::vector<double>& img, std::size_t h, std::size_t w,
                                 const std::vector<double>& taps) {
  const std::size_t k = taps.size();
  const std::size_t ow = w - k + 1;
  const std::size_t oh = h - k + 1;
  std::vector<double> rows(h * ow);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < ow; ++x) {
      double s = 0.0;
      for (std::size_t t = 0; t < k; ++t) s += taps[t] * img[y * w + x + t];
      rows[y * ow + x] = s;
    }
  }
  std::vector<double> out(oh * ow);
  for (std::size_t y = 0; y < oh; ++y) {
    for (std::size_t x = 0; x < ow; ++x) {
      double s = 0.0;
      for (std::size_t t = 0; t < k; ++t) s += taps[t] * rows[(y + t) * ow + x];
      out[y * ow + x] = s;
    }
  }
  return out;
}

}  // namespace

double psnr_from_mse(double mse, double peak) noexcept {
  if (mse <= 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(peak * peak / mse));
}

double psnr(std::span<const double> pred, std::span<const double> target, double peak) {
  require_same_size(pred, target, "psnr");
  if (pred.empty()) throw Error(ErrorCode::ShapeMismatch, "psnr of empty grids");
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double e = pred[i] - target[i];
    sum += e * e;
  }
  return psnr_from_mse(sum / static_cast<double>(pred.size()), peak);
}

std::vector<double> gaussian_window(std::size_t size, double sigma) {
  std::vector<double> taps(size);
  const double centre = (static_cast<double>(size) - 1.0) / 2.0;
  double total = 0.0;
  for (std::size_t i = 0; i < size; ++i) {
    const double x = static_cast<double>(i) - centre;
    taps[i] = std::exp(-x * x / (2.0 * sigma * sigma));
    total += taps[i];
  }
  for (auto& t : taps) t /= total;
  return taps;
}

double ssim(std::span<const double> pred, std::span<const double> target, std::size_t height, std::size_t width,
            std::size_t channels, const SsimOptions& options) {
  require_same_size(pred, target, "ssim");
  if (pred.size() != height * width * channels) {
    throw Error(ErrorCode::ShapeMismatch, "ssim: value count does not match the image shape");
  }
  const std::size_t k = options.window;
  if (height < k || width < k) {
    throw Error(ErrorCode::TooSmall, std::to_string(height) + "x" + std::to_string(width) + " image for a " +
                                         std::to_string(k) + "x" + std::to_string(k) + " window");
  }
  const auto taps = gaussian_window(k, options.sigma);
  const double c1 = (options.k1 * options.data_range) * (options.k1 * options.data_range);
  const double c2 = (options.k2 * options.data_range) * (options.k2 * options.data_range);
  const std::size_t n = height * width;

  double total = 0.0;
  std::size_t windows = 0;
  std::vector<double> x(n), y(n), xx(n), yy(n), xy(n);
  for (std::size_t c = 0; c < channels; ++c) {
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = pred[i * channels + c];
      y[i] = target[i * channels + c];
      xx[i] = x[i] * x[i];
      yy[i] = y[i] * y[i];
      xy[i] = x[i] * y[i];
    }
    const auto mx = filter_valid(x, height, width, taps);
    const auto my = filter_valid(y, height, width, taps);
    const auto sxx = filter_valid(xx, height, width, taps);
    const auto syy = filter_valid(yy, height, width, taps);
    const auto sxy = filter_valid(xy, height, width, taps);
    for (std::size_t i = 0; i < mx.size(); ++i) {
      const double vx = sxx[i] - mx[i] * mx[i];
      const double vy = syy[i] - my[i] * my[i];
      const double cov = sxy[i] - mx[i] * my[i];
      total += ((2.0 * mx[i] * my[i] + c1) * (2.0 * cov + c2)) /
               ((mx[i] * mx[i] + my[i] * my[i] + c1) * (vx + vy + c2));
    }
    windows += mx.size();
  }
  return total / static_cast<double>(windows);
}

double iou(std::span<const double> pred, std::span<const double> target, double threshold) {
  require_same_size(pred, target, "iou");
  std::size_t both = 0;
  std::size_t either = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const bool a = pred[i] >= threshold;
    const bool b = target[i] >= threshold;
    both += static_cast<std::size_t>(a && b);
    either += static_cast<std::size_t>(a || b);
  }
  return either == 0 ? 1.0 : static_cast<double>(both) / static_cast<double>(either);
}

QualityReport evaluate(const Grid& pred, const Grid& target, bool with_iou) {
  if (pred.extents != target.extents || pred.channels != target.channels) {
    throw Error(ErrorCode::ShapeMismatch, "prediction and target grids differ in shape");
  }
  QualityReport r;
  r.psnr = psnr(pred.values, target.values, target.peak);
  if (target.dims() == 2 && target.extents[0] >= 11 && target.extents[1] >= 11) {
    SsimOptions opt;
    opt.data_range = target.is_signed ? 2.0 * target.peak : target.peak;
    r.ssim = ssim(pred.values, target.values, static_cast<std::size_t>(target.extents[0]),
                  static_cast<std::size_t>(target.extents[1]), target.channels, opt);
  }
  if (with_iou) {
    const double threshold = target.is_signed ? 0.0 : 0.5 * target.peak;
    r.iou = iou(pred.values, target.values, threshold);
  }
  return r;
}

}  // namespace asmr
