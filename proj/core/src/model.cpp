#include "asmr/model.hpp"

#include <cmath>
#include <numeric>
#include <random>

#include "asmr/error.hpp"

namespace asmr {

namespace {

void validate_widths(const std::vector<std::size_t>& widths, double omega0) {
  if (widths.size() < 2) throw Error(ErrorCode::BadWidths, "need at least an input and an output width");
  for (auto w : widths) {
    if (w == 0) throw Error(ErrorCode::BadWidths, "widths must be positive");
  }
  if (!(omega0 > 0.0) || !std::isfinite(omega0)) throw Error(ErrorCode::BadWidths, "omega0 must be positive");
}

void fill_uniform(Tensor& t, double bound, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (auto& v : t.values()) v = dist(rng);
}

std::vector<std::size_t> to_factors(const std::vector<std::int64_t>& v) {
  return {v.begin(), v.end()};
}

Shape grid_shape(const std::vector<std::int64_t>& extents, std::size_t channels) {
  Shape s(extents.begin(), extents.end());
  s.push_back(channels);
  return s;
}

// `trainable` selects parameter() leaves; otherwise parameters are plain views.
Var leaf(Tape& tape, const Tensor& t, bool trainable) {
  return trainable ? tape.parameter(const_cast<Tensor&>(t)) : tape.view(t);
}

void check_phi(const SirenModel& backbone, const InstanceModulation* phi) {
  if (phi == nullptr) return;
  if (phi->phi.size() + 1 != backbone.layers()) {
    throw Error(ErrorCode::ShapeMismatch, "instance modulation needs one vector per hidden layer");
  }
  for (std::size_t i = 0; i < phi->phi.size(); ++i) {
    if (phi->phi[i].size() != backbone.widths[i + 1]) {
      throw Error(ErrorCode::ShapeMismatch, "instance modulation " + std::to_string(i) + " has wrong width");
    }
  }
}

Var shared_impl(Tape& tape, const AsmrModel& model, const InstanceModulation* phi, bool trainable) {
  check_phi(model.backbone, phi);
  const auto& net = model.backbone;
  const auto& scheme = model.scheme;
  const std::size_t layers = net.layers();

  Var z = tape.constant(level_lattice(scheme, 0));
  for (std::size_t i = 1; i < layers; ++i) {
    Var h = tape.affine(z, leaf(tape, net.weights[i - 1], trainable), leaf(tape, net.biases[i - 1], trainable));
    h = tape.upsample_nearest(h, to_factors(scheme.level_bases(i)));
    Var m = tape.matmul(tape.constant(level_lattice(scheme, i)), leaf(tape, model.modulators[i - 1], trainable));
    m = tape.tile_replicate(m, to_factors(scheme.level_cumulative(i - 1)));
    Var u = tape.add(h, m);
    if (phi != nullptr) u = tape.add_rows(u, leaf(tape, phi->phi[i - 1], trainable));
    z = tape.sine(u, net.omega0);
  }
  return tape.affine(z, leaf(tape, net.weights.back(), trainable), leaf(tape, net.biases.back(), trainable));
}

Var naive_impl(Tape& tape, const AsmrModel& model, std::span<const std::int64_t> indices,
               const InstanceModulation* phi, bool trainable) {
  check_phi(model.backbone, phi);
  const auto& net = model.backbone;
  const std::size_t layers = net.layers();
  Var z = tape.constant(level_inputs(model.scheme, 0, indices));
  for (std::size_t i = 1; i < layers; ++i) {
    Var u = tape.affine(z, leaf(tape, net.weights[i - 1], trainable), leaf(tape, net.biases[i - 1], trainable));
    Var m = tape.matmul(tape.constant(level_inputs(model.scheme, i, indices)),
                        leaf(tape, model.modulators[i - 1], trainable));
    u = tape.add(u, m);
    if (phi != nullptr) u = tape.add_rows(u, leaf(tape, phi->phi[i - 1], trainable));
    z = tape.sine(u, net.omega0);
  }
  return tape.affine(z, leaf(tape, net.weights.back(), trainable), leaf(tape, net.biases.back(), trainable));
}

Var siren_impl(Tape& tape, const SirenModel& model, const Tensor& coords, bool trainable) {
  if (coords.rank() != 2 || coords.cols() != model.widths.front()) {
    throw Error(ErrorCode::ShapeMismatch, "SIREN expects [n, " + std::to_string(model.widths.front()) + "] coords");
  }
  Var z = tape.view(coords);
  for (std::size_t i = 0; i + 1 < model.layers(); ++i) {
    z = tape.sine(tape.affine(z, leaf(tape, model.weights[i], trainable), leaf(tape, model.biases[i], trainable)),
                  model.omega0);
  }
  return tape.affine(z, leaf(tape, model.weights.back(), trainable), leaf(tape, model.biases.back(), trainable));
}

}  // namespace

std::size_t SirenModel::parameter_count() const noexcept {
  std::size_t n = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) n += weights[i].size() + biases[i].size();
  return n;
}

std::vector<Tensor*> SirenModel::parameters() {
  std::vector<Tensor*> out;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    out.push_back(&weights[i]);
    out.push_back(&biases[i]);
  }
  return out;
}

std::vector<const Tensor*> SirenModel::parameters() const {
  std::vector<const Tensor*> out;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    out.push_back(&weights[i]);
    out.push_back(&biases[i]);
  }
  return out;
}

std::size_t AsmrModel::parameter_count() const noexcept {
  std::size_t n = backbone.parameter_count();
  for (const auto& m : modulators) n += m.size();
  return n;
}

std::vector<Tensor*> AsmrModel::parameters() {
  auto out = backbone.parameters();
  for (auto& m : modulators) out.push_back(&m);
  return out;
}

std::vector<const Tensor*> AsmrModel::parameters() const {
  auto out = std::as_const(backbone).parameters();
  for (const auto& m : modulators) out.push_back(&m);
  return out;
}

InstanceModulation InstanceModulation::zeros(const SirenModel& backbone) {
  InstanceModulation im;
  for (std::size_t i = 1; i + 1 < backbone.widths.size(); ++i) im.phi.emplace_back(Shape{backbone.widths[i]});
  return im;
}

SirenModel init_siren(std::vector<std::size_t> widths, double omega0, std::uint64_t seed) {
  validate_widths(widths, omega0);
  SirenModel m;
  m.widths = std::move(widths);
  m.omega0 = omega0;
  std::mt19937_64 rng(seed);
  for (std::size_t i = 1; i < m.widths.size(); ++i) {
    const auto fan_in = static_cast<double>(m.widths[i - 1]);
    Tensor w(Shape{m.widths[i - 1], m.widths[i]});
    fill_uniform(w, i == 1 ? 1.0 / fan_in : std::sqrt(6.0 / fan_in) / omega0, rng);
    m.weights.push_back(std::move(w));
    m.biases.emplace_back(Shape{m.widths[i]});
  }
  return m;
}

AsmrModel init_asmr(std::vector<std::size_t> widths, double omega0, PartitionScheme scheme, std::uint64_t seed) {
  validate_widths(widths, omega0);
  if (widths.size() - 1 != scheme.levels()) {
    throw Error(ErrorCode::LevelCountMismatch, std::to_string(widths.size() - 1) + " layers for a " +
                                                   std::to_string(scheme.levels()) + "-level scheme");
  }
  if (widths.front() != scheme.dims()) {
    throw Error(ErrorCode::BadWidths, "input width " + std::to_string(widths.front()) + " for " +
                                          std::to_string(scheme.dims()) + "-D data");
  }
  AsmrModel m;
  m.backbone = init_siren(std::move(widths), omega0, seed);
  // Modulators draw from a stream independent of the backbone's.
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  const auto d = m.backbone.widths.front();
  for (std::size_t i = 1; i < m.backbone.layers(); ++i) {
    Tensor w(Shape{d, m.backbone.widths[i]});
    fill_uniform(w, std::sqrt(1.0 / static_cast<double>(d)), rng);
    m.modulators.push_back(std::move(w));
  }
  m.scheme = std::move(scheme);
  return m;
}

Tensor level_inputs(const PartitionScheme& scheme, std::size_t level, std::span<const std::int64_t> indices) {
  if (level >= scheme.levels()) throw Error(ErrorCode::LevelOutOfRange, "level " + std::to_string(level));
  const std::size_t d = scheme.dims();
  Tensor out(Shape{indices.size(), d});
  const auto total = scheme.total_points();
  for (std::size_t r = 0; r < indices.size(); ++r) {
    std::int64_t rem = indices[r];
    if (rem < 0 || rem >= total) {
      throw Error(ErrorCode::CoordOutOfRange, "linear index " + std::to_string(rem) + " out of range");
    }
    for (std::size_t a = d; a-- > 0;) {
      const std::int64_t x = rem % scheme.extent(a);
      rem /= scheme.extent(a);
      const auto digit = (x / scheme.grid_size(a, level)) % scheme.base(a, level);
      out.at(r, a) = normalize_level(digit, scheme.base(a, level));
    }
  }
  return out;
}

Tensor level_lattice(const PartitionScheme& scheme, std::size_t level) {
  const LevelGrid grid = level_grid(scheme, level);
  Tensor out(grid_shape(grid.extents, grid.dims()));
  for (std::size_t k = 0; k < grid.values.size(); ++k) {
    out[k] = normalize_level(grid.values[k], grid.extents[k % grid.dims()]);
  }
  return out;
}

Tensor siren_coordinates(std::span<const std::int64_t> extents) {
  const auto total = std::accumulate(extents.begin(), extents.end(), std::int64_t{1}, std::multiplies<>());
  std::vector<std::int64_t> all(static_cast<std::size_t>(total));
  std::iota(all.begin(), all.end(), 0);
  return siren_coordinates(extents, all);
}

Tensor siren_coordinates(std::span<const std::int64_t> extents, std::span<const std::int64_t> indices) {
  const std::size_t d = extents.size();
  Tensor out(Shape{indices.size(), d});
  for (std::size_t r = 0; r < indices.size(); ++r) {
    std::int64_t rem = indices[r];
    for (std::size_t a = d; a-- > 0;) {
      const auto x = rem % extents[a];
      rem /= extents[a];
      out.at(r, a) = extents[a] > 1 ? 2.0 * static_cast<double>(x) / static_cast<double>(extents[a] - 1) - 1.0 : 0.0;
    }
  }
  return out;
}

Tensor forward_naive(const AsmrModel& model, std::span<const std::int64_t> indices, const InstanceModulation* phi) {
  Tape tape(false);
  return std::move(naive_impl(tape, model, indices, phi, false).value());
}

Tensor forward_naive(const AsmrModel& model, std::span<const Coord> coords, const InstanceModulation* phi) {
  std::vector<std::int64_t> indices;
  indices.reserve(coords.size());
  for (const auto& c : coords) indices.push_back(model.scheme.ravel(c));
  return forward_naive(model, indices, phi);
}

Tensor forward_shared(const AsmrModel& model, const InstanceModulation* phi) {
  Tape tape(false);
  Tensor out = std::move(shared_impl(tape, model, phi, false).value());
  const auto cols = out.cols();
  return out.reshaped(Shape{out.rows(), cols});
}

Tensor forward_siren(const SirenModel& model, const Tensor& coords) {
  Tape tape(false);
  return std::move(siren_impl(tape, model, coords, false).value());
}

Var forward_naive(Tape& tape, AsmrModel& model, std::span<const std::int64_t> indices, InstanceModulation* phi) {
  return naive_impl(tape, model, indices, phi, true);
}

Var forward_shared(Tape& tape, AsmrModel& model, InstanceModulation* phi) {
  return shared_impl(tape, model, phi, true);
}

Var forward_siren(Tape& tape, SirenModel& model, const Tensor& coords) { return siren_impl(tape, model, coords, true); }

std::uint64_t count_shared_macs(const AsmrModel& model) {
  Tape tape(false);
  shared_impl(tape, model, nullptr, false);
  return tape.macs();
}

}  // namespace asmr
