#pragma once

#include <cstddef>

namespace asmr::detail {

/// y = sin(w x).
void sin_scaled(const double* x, double* y, std::size_t n, double w);

/// y = sin(w x), slope = w cos(w x). The sine equals sin_scaled bit for bit.
void sin_slope_scaled(const double* x, double* y, double* slope, std::size_t n, double w);

}  // namespace asmr::detail
