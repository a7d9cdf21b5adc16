#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "asmr/coords.hpp"

namespace asmr {

// Multiply-accumulate accounting. Only weight-matrix MACs are counted: no
// biases, activations or replication copies.

struct LayerMacs {
  std::size_t layer = 0;     // 1-based
  std::uint64_t points = 0;  // rows the layer is evaluated on
  std::uint64_t macs = 0;
};

struct ModulatorMacs {
  std::size_t level = 0;    // 1-based
  std::uint64_t grids = 0;  // prod_a B_level^(a)
  std::uint64_t macs = 0;
};

struct MacReport {
  std::vector<LayerMacs> layers;
  std::vector<ModulatorMacs> modulators;
  std::uint64_t total_macs = 0;
  std::uint64_t total_points = 0;  // samples the total is amortized over
  std::uint64_t parameters = 0;

  [[nodiscard]] double per_sample() const noexcept {
    return total_points == 0 ? 0.0 : static_cast<double>(total_macs) / static_cast<double>(total_points);
  }

  /// `layer,points,macs` rows (modulators as `modK`), then `total`,
  /// `per_sample` and `params` footer rows.
  [[nodiscard]] std::string to_csv() const;
};

/// Every layer runs on every sample.
MacReport mac_siren(const std::vector<std::size_t>& widths, std::uint64_t n_samples);

/// Layer i runs on prod_a C_{i-1}^(a) points (layer 1 on the level-0
/// lattice), modulator i on the level-i lattice, the output layer on the full
/// grid. Throws Error{InconsistentConfig}.
MacReport mac_asmr(const std::vector<std::size_t>& widths, const PartitionScheme& scheme);

std::uint64_t siren_parameter_count(const std::vector<std::size_t>& widths);
std::uint64_t asmr_parameter_count(const std::vector<std::size_t>& widths);

/// Idealized 1-D cost model with uniform base B and a uniform per-layer cost
/// M = width^2: layer i (1..L) is evaluated B^i times, N = B^L.
struct BoundCheck {
  std::uint64_t base = 0;
  std::size_t levels = 0;
  double layer_macs = 0.0;          // M
  double per_sample = 0.0;          // sum_i B^i M / B^L
  double closed_form = 0.0;         // M * B (B^L - 1) / ((B - 1) B^L)
  double asymptote = 0.0;           // M * B / (B - 1)
  double bound = 0.0;               // 2 M
  double exact_per_sample = 0.0;    // mac_asmr on widths [1, width x (L-1), 1]
  double siren_per_sample = 0.0;    // L M
  [[nodiscard]] bool holds() const noexcept { return per_sample <= bound && exact_per_sample <= bound; }
};

BoundCheck mac_bound_check(std::size_t width, std::uint64_t base, std::size_t levels);

struct DepthRow {
  std::size_t levels = 0;
  std::uint64_t siren_params = 0;
  std::uint64_t asmr_params = 0;
  double siren_per_sample = 0.0;
  double asmr_per_sample = 0.0;        // exact count, 1-D, N = B^L
  double asmr_idealized = 0.0;         // BoundCheck::per_sample
};

/// Uniform width and base, 1-D, one row per depth in [min_levels, max_levels].
std::vector<DepthRow> sweep_depth(std::size_t width, std::uint64_t base, std::size_t min_levels,
                                  std::size_t max_levels);
std::string depth_csv(const std::vector<DepthRow>& rows);

}  // namespace asmr
