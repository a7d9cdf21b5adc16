#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace asmr {

/// One integer coordinate per axis.
using Coord = std::vector<std::int64_t>;

/// Per-axis bases of partition with their cumulative products and grid sizes.
///
/// For axis a and level i: cumulative(a, i) = B_0 * ... * B_i and
/// grid_size(a, i) = extent(a) / cumulative(a, i). The product of all bases on
/// an axis equals that axis' extent exactly, so grid_size(a, L-1) == 1.
class PartitionScheme {
 public:
  PartitionScheme() = default;

  /// Throws Error{NonPositiveBase | RaggedLevels | BaseProductMismatch}.
  static PartitionScheme make(std::vector<std::vector<std::int64_t>> bases_per_axis,
                              std::vector<std::int64_t> extents);

  /// Extents are taken to be the per-axis base products.
  static PartitionScheme from_bases(std::vector<std::vector<std::int64_t>> bases_per_axis);

  /// Parses `axis0=4x4x4x8;axis1=4x4x6x8`. The `axisK=` prefixes are optional
  /// and, when present, must be in order.
  static PartitionScheme parse(std::string_view text);

  [[nodiscard]] std::string to_string() const;

  /// Same bases on every one of `dims` axes. Requires a single-axis scheme.
  [[nodiscard]] PartitionScheme broadcast(std::size_t dims) const;

  /// Same per-axis extents, level order permuted by `order` (order[i] = old level).
  [[nodiscard]] PartitionScheme permuted(std::span<const std::size_t> order) const;

  [[nodiscard]] std::size_t dims() const noexcept { return bases_.size(); }
  [[nodiscard]] std::size_t levels() const noexcept { return bases_.empty() ? 0 : bases_[0].size(); }

  [[nodiscard]] std::int64_t base(std::size_t axis, std::size_t level) const { return bases_.at(axis).at(level); }
  [[nodiscard]] std::int64_t cumulative(std::size_t axis, std::size_t level) const {
    return cumulative_.at(axis).at(level);
  }
  [[nodiscard]] std::int64_t grid_size(std::size_t axis, std::size_t level) const {
    return grid_sizes_.at(axis).at(level);
  }
  [[nodiscard]] std::int64_t extent(std::size_t axis) const { return extents_.at(axis); }

  [[nodiscard]] const std::vector<std::int64_t>& bases(std::size_t axis) const { return bases_.at(axis); }
  [[nodiscard]] const std::vector<std::int64_t>& extents() const noexcept { return extents_; }

  /// Bases of one level across all axes.
  [[nodiscard]] std::vector<std::int64_t> level_bases(std::size_t level) const;
  /// Cumulative bases of one level across all axes.
  [[nodiscard]] std::vector<std::int64_t> level_cumulative(std::size_t level) const;

  /// prod_a B_level^(a): number of distinct level-`level` coordinates.
  [[nodiscard]] std::int64_t level_points(std::size_t level) const;
  /// prod_a C_level^(a): number of cells at the resolution reached by `level`.
  [[nodiscard]] std::int64_t cumulative_points(std::size_t level) const;
  /// prod_a N^(a).
  [[nodiscard]] std::int64_t total_points() const;

  /// Row-major linear index (last axis fastest) <-> coordinate.
  [[nodiscard]] std::int64_t ravel(std::span<const std::int64_t> x) const;
  [[nodiscard]] Coord unravel(std::int64_t index) const;

  friend bool operator==(const PartitionScheme&, const PartitionScheme&) = default;

 private:
  std::vector<std::vector<std::int64_t>> bases_;
  std::vector<std::vector<std::int64_t>> cumulative_;
  std::vector<std::vector<std::int64_t>> grid_sizes_;
  std::vector<std::int64_t> extents_;
};

/// x_i = floor(x / G_i) mod B_i for every level i, per axis.
/// Returns L vectors, each with one entry per axis. Throws Error{CoordOutOfRange}.
std::vector<Coord> decompose(std::span<const std::int64_t> x, const PartitionScheme& scheme);

/// Inverse of decompose: sum_i x_i * G_i per axis. Throws Error{LevelValueOutOfRange}.
Coord recompose(std::span<const Coord> levels, const PartitionScheme& scheme);

/// Full lattice of level-`level` coordinates.
struct LevelGrid {
  std::vector<std::int64_t> extents;  // B_level per axis
  std::vector<std::int64_t> values;   // points x dims, row-major, last axis fastest

  [[nodiscard]] std::size_t dims() const noexcept { return extents.size(); }
  [[nodiscard]] std::size_t points() const noexcept { return dims() == 0 ? 0 : values.size() / dims(); }
};

/// Throws Error{LevelOutOfRange}.
LevelGrid level_grid(const PartitionScheme& scheme, std::size_t level);

/// v -> 2v/(B-1) - 1 for B >= 2, and 0 for B == 1.
double normalize_level(std::int64_t value, std::int64_t base) noexcept;
std::vector<double> normalize_level(std::span<const std::int64_t> values, std::int64_t base);

}  // namespace asmr
