#include "asmr/coords.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

#include "asmr/error.hpp"

namespace asmr {

namespace {

std::string join_bases(const std::vector<std::int64_t>& bases) {
  std::string out;
  for (std::size_t i = 0; i < bases.size(); ++i) {
    if (i != 0) out += 'x';
    out += std::to_string(bases[i]);
  }
  return out;
}

std::int64_t parse_int(std::string_view text, std::string_view context) {
  std::int64_t value = 0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || text.empty()) {
    throw Error(ErrorCode::ConfigError, "bad integer '" + std::string(text) + "' in scheme '" +
                                            std::string(context) + "'");
  }
  return value;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

}  // namespace

PartitionScheme PartitionScheme::make(std::vector<std::vector<std::int64_t>> bases_per_axis,
                                      std::vector<std::int64_t> extents) {
  if (bases_per_axis.empty() || bases_per_axis.size() != extents.size()) {
    throw Error(ErrorCode::RaggedLevels, "need one base list and one extent per axis");
  }
  const std::size_t levels = bases_per_axis[0].size();
  PartitionScheme s;
  for (std::size_t a = 0; a < bases_per_axis.size(); ++a) {
    const auto& bases = bases_per_axis[a];
    if (bases.empty()) throw Error(ErrorCode::RaggedLevels, "axis " + std::to_string(a) + " has no levels");
    if (bases.size() != levels) {
      throw Error(ErrorCode::RaggedLevels, "axis " + std::to_string(a) + " has " + std::to_string(bases.size()) +
                                               " levels, axis 0 has " + std::to_string(levels));
    }
    if (extents[a] <= 0) {
      throw Error(ErrorCode::NonPositiveBase, "extent of axis " + std::to_string(a) + " must be positive");
    }
    std::vector<std::int64_t> cumulative(levels);
    std::int64_t product = 1;
    for (std::size_t i = 0; i < levels; ++i) {
      if (bases[i] < 1) {
        throw Error(ErrorCode::NonPositiveBase, "base " + std::to_string(bases[i]) + " at axis " +
                                                    std::to_string(a) + " level " + std::to_string(i));
      }
      product *= bases[i];
      if (product > extents[a]) break;
      cumulative[i] = product;
    }
    if (product != extents[a]) {
      throw Error(ErrorCode::BaseProductMismatch, "bases " + join_bases(bases) + " do not multiply to extent " +
                                                      std::to_string(extents[a]));
    }
    if (std::none_of(bases.begin(), bases.end(), [](std::int64_t b) { return b >= 2; })) {
      throw Error(ErrorCode::NonPositiveBase, "axis " + std::to_string(a) + " needs at least one base >= 2");
    }
    std::vector<std::int64_t> grid(levels);
    for (std::size_t i = 0; i < levels; ++i) grid[i] = extents[a] / cumulative[i];
    s.cumulative_.push_back(std::move(cumulative));
    s.grid_sizes_.push_back(std::move(grid));
  }
  s.bases_ = std::move(bases_per_axis);
  s.extents_ = std::move(extents);
  return s;
}

PartitionScheme PartitionScheme::from_bases(std::vector<std::vector<std::int64_t>> bases_per_axis) {
  std::vector<std::int64_t> extents;
  for (const auto& bases : bases_per_axis) {
    std::int64_t product = 1;
    for (auto b : bases) {
      if (b < 1) throw Error(ErrorCode::NonPositiveBase, "base " + std::to_string(b));
      product *= b;
    }
    extents.push_back(product);
  }
  return make(std::move(bases_per_axis), std::move(extents));
}

PartitionScheme PartitionScheme::parse(std::string_view text) {
  std::vector<std::vector<std::int64_t>> bases;
  std::string_view rest = text;
  while (true) {
    const auto semi = rest.find(';');
    std::string_view part = trim(rest.substr(0, semi));
    if (const auto eq = part.find('='); eq != std::string_view::npos) {
      const std::string expected = "axis" + std::to_string(bases.size());
      if (trim(part.substr(0, eq)) != expected) {
        throw Error(ErrorCode::ConfigError, "expected '" + expected + "=' in scheme '" + std::string(text) + "'");
      }
      part = trim(part.substr(eq + 1));
    }
    if (part.empty()) throw Error(ErrorCode::ConfigError, "empty axis in scheme '" + std::string(text) + "'");
    std::vector<std::int64_t> axis;
    while (true) {
      const auto x = part.find('x');
      axis.push_back(parse_int(trim(part.substr(0, x)), text));
      if (x == std::string_view::npos) break;
      part.remove_prefix(x + 1);
    }
    bases.push_back(std::move(axis));
    if (semi == std::string_view::npos) break;
    rest.remove_prefix(semi + 1);
  }
  return from_bases(std::move(bases));
}

std::string PartitionScheme::to_string() const {
  std::string out;
  for (std::size_t a = 0; a < bases_.size(); ++a) {
    if (a != 0) out += ';';
    out += "axis" + std::to_string(a) + "=" + join_bases(bases_[a]);
  }
  return out;
}

PartitionScheme PartitionScheme::broadcast(std::size_t dims) const {
  if (this->dims() != 1) throw Error(ErrorCode::ConfigError, "only a single-axis scheme can be broadcast");
  return make(std::vector<std::vector<std::int64_t>>(dims, bases_[0]), std::vector<std::int64_t>(dims, extents_[0]));
}

PartitionScheme PartitionScheme::permuted(std::span<const std::size_t> order) const {
  if (order.size() != levels()) throw Error(ErrorCode::RaggedLevels, "permutation length differs from level count");
  auto bases = bases_;
  for (std::size_t a = 0; a < dims(); ++a) {
    for (std::size_t i = 0; i < order.size(); ++i) bases[a][i] = bases_[a].at(order[i]);
  }
  return make(std::move(bases), extents_);
}

std::vector<std::int64_t> PartitionScheme::level_bases(std::size_t level) const {
  std::vector<std::int64_t> out;
  for (const auto& b : bases_) out.push_back(b.at(level));
  return out;
}

std::vector<std::int64_t> PartitionScheme::level_cumulative(std::size_t level) const {
  std::vector<std::int64_t> out;
  for (const auto& c : cumulative_) out.push_back(c.at(level));
  return out;
}

std::int64_t PartitionScheme::level_points(std::size_t level) const {
  std::int64_t n = 1;
  for (const auto& b : bases_) n *= b.at(level);
  return n;
}

std::int64_t PartitionScheme::cumulative_points(std::size_t level) const {
  std::int64_t n = 1;
  for (const auto& c : cumulative_) n *= c.at(level);
  return n;
}

std::int64_t PartitionScheme::total_points() const {
  std::int64_t n = 1;
  for (auto e : extents_) n *= e;
  return n;
}

std::int64_t PartitionScheme::ravel(std::span<const std::int64_t> x) const {
  if (x.size() != dims()) throw Error(ErrorCode::CoordOutOfRange, "coordinate has wrong number of axes");
  std::int64_t index = 0;
  for (std::size_t a = 0; a < dims(); ++a) {
    if (x[a] < 0 || x[a] >= extents_[a]) {
      throw Error(ErrorCode::CoordOutOfRange,
                  std::to_string(x[a]) + " outside [0, " + std::to_string(extents_[a]) + ") on axis " +
                      std::to_string(a));
    }
    index = index * extents_[a] + x[a];
  }
  return index;
}

Coord PartitionScheme::unravel(std::int64_t index) const {
  if (index < 0 || index >= total_points()) {
    throw Error(ErrorCode::CoordOutOfRange, "linear index " + std::to_string(index) + " out of range");
  }
  Coord x(dims());
  for (std::size_t a = dims(); a-- > 0;) {
    x[a] = index % extents_[a];
    index /= extents_[a];
  }
  return x;
}

std::vector<Coord> decompose(std::span<const std::int64_t> x, const PartitionScheme& scheme) {
  if (x.size() != scheme.dims()) {
    throw Error(ErrorCode::CoordOutOfRange, "coordinate has " + std::to_string(x.size()) + " axes, scheme has " +
                                                std::to_string(scheme.dims()));
  }
  for (std::size_t a = 0; a < x.size(); ++a) {
    if (x[a] < 0 || x[a] >= scheme.extent(a)) {
      throw Error(ErrorCode::CoordOutOfRange, std::to_string(x[a]) + " outside [0, " +
                                                  std::to_string(scheme.extent(a)) + ") on axis " +
                                                  std::to_string(a));
    }
  }
  std::vector<Coord> levels(scheme.levels(), Coord(scheme.dims()));
  for (std::size_t i = 0; i < scheme.levels(); ++i) {
    for (std::size_t a = 0; a < x.size(); ++a) {
      levels[i][a] = (x[a] / scheme.grid_size(a, i)) % scheme.base(a, i);
    }
  }
  return levels;
}

Coord recompose(std::span<const Coord> levels, const PartitionScheme& scheme) {
  if (levels.size() != scheme.levels()) {
    throw Error(ErrorCode::LevelValueOutOfRange, "expected " + std::to_string(scheme.levels()) + " levels");
  }
  Coord x(scheme.dims(), 0);
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (levels[i].size() != scheme.dims()) {
      throw Error(ErrorCode::LevelValueOutOfRange, "level " + std::to_string(i) + " has wrong number of axes");
    }
    for (std::size_t a = 0; a < scheme.dims(); ++a) {
      const auto v = levels[i][a];
      if (v < 0 || v >= scheme.base(a, i)) {
        throw Error(ErrorCode::LevelValueOutOfRange, "level " + std::to_string(i) + " value " + std::to_string(v) +
                                                         " outside [0, " + std::to_string(scheme.base(a, i)) + ")");
      }
      x[a] += v * scheme.grid_size(a, i);
    }
  }
  return x;
}

LevelGrid level_grid(const PartitionScheme& scheme, std::size_t level) {
  if (level >= scheme.levels()) {
    throw Error(ErrorCode::LevelOutOfRange,
                "level " + std::to_string(level) + " on a " + std::to_string(scheme.levels()) + "-level scheme");
  }
  LevelGrid grid;
  grid.extents = scheme.level_bases(level);
  const auto d = grid.extents.size();
  const auto n = scheme.level_points(level);
  grid.values.resize(static_cast<std::size_t>(n) * d);
  for (std::int64_t p = 0; p < n; ++p) {
    std::int64_t rem = p;
    for (std::size_t a = d; a-- > 0;) {
      grid.values[static_cast<std::size_t>(p) * d + a] = rem % grid.extents[a];
      rem /= grid.extents[a];
    }
  }
  return grid;
}

double normalize_level(std::int64_t value, std::int64_t base) noexcept {
  if (base < 2) return 0.0;
  return 2.0 * static_cast<double>(value) / static_cast<double>(base - 1) - 1.0;
}

std::vector<double> normalize_level(std::span<const std::int64_t> values, std::int64_t base) {
  std::vector<double> out(values.size());
  std::transform(values.begin(), values.end(), out.begin(), [base](std::int64_t v) { return normalize_level(v, base); });
  return out;
}

}  // namespace asmr
