#include "sine_kernels.hpp"

#include <cmath>

// Fixed-width blocks: every element goes through the same vector routine
// whatever the length or alignment of the buffers.
namespace asmr::detail {

namespace {

constexpr std::size_t kLanes = 8;

}  // namespace

void sin_scaled(const double* x, double* y, std::size_t n, double w) {
  alignas(64) double in[kLanes];
  alignas(64) double s[kLanes];
  for (std::size_t i = 0; i < n; i += kLanes) {
    const std::size_t m = n - i < kLanes ? n - i : kLanes;
    for (std::size_t j = 0; j < kLanes; ++j) in[j] = j < m ? w * x[i + j] : 0.0;
    for (std::size_t j = 0; j < kLanes; ++j) s[j] = std::sin(in[j]);
    for (std::size_t j = 0; j < m; ++j) y[i + j] = s[j];
  }
}

void sin_slope_scaled(const double* x, double* y, double* slope, std::size_t n, double w) {
  alignas(64) double in[kLanes];
  alignas(64) double s[kLanes];
  alignas(64) double c[kLanes];
  for (std::size_t i = 0; i < n; i += kLanes) {
    const std::size_t m = n - i < kLanes ? n - i : kLanes;
    for (std::size_t j = 0; j < kLanes; ++j) in[j] = j < m ? w * x[i + j] : 0.0;
    for (std::size_t j = 0; j < kLanes; ++j) s[j] = std::sin(in[j]);
    for (std::size_t j = 0; j < kLanes; ++j) c[j] = std::cos(in[j]);
    for (std::size_t j = 0; j < m; ++j) {
      y[i + j] = s[j];
      slope[i + j] = w * c[j];
    }
  }
}

}  // namespace asmr::detail
