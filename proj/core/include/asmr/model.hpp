#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "asmr/coords.hpp"
#include "asmr/tensor.hpp"

namespace asmr {

/// Sinusoidal MLP: z_i = sin(omega0 * (z_{i-1} W_i + b_i)) for hidden layers,
/// and a purely affine output layer.
struct SirenModel {
  std::vector<std::size_t> widths;  // d_0 ... d_L
  double omega0 = 30.0;
  std::vector<Tensor> weights;  // W_i: [d_{i-1}, d_i]
  std::vector<Tensor> biases;   // b_i: [d_i]

  [[nodiscard]] std::size_t layers() const noexcept { return weights.size(); }
  [[nodiscard]] std::size_t parameter_count() const noexcept;
  /// W_1, b_1, ..., W_L, b_L.
  [[nodiscard]] std::vector<Tensor*> parameters();
  [[nodiscard]] std::vector<const Tensor*> parameters() const;
};

/// SIREN backbone with one linear modulator per level 1..L-1 of a partition
/// scheme; the modulator output is added to that layer's pre-activation.
struct AsmrModel {
  SirenModel backbone;
  PartitionScheme scheme;
  std::vector<Tensor> modulators;  // modulators[i - 1]: [d, d_i] for level i

  [[nodiscard]] std::size_t levels() const noexcept { return scheme.levels(); }
  [[nodiscard]] std::size_t parameter_count() const noexcept;
  /// Backbone parameters followed by the modulators.
  [[nodiscard]] std::vector<Tensor*> parameters();
  [[nodiscard]] std::vector<const Tensor*> parameters() const;
};

/// Per-instance bias added to every hidden layer: phi[i - 1] has d_i entries.
struct InstanceModulation {
  std::vector<Tensor> phi;

  static InstanceModulation zeros(const SirenModel& backbone);
};

/// Throws Error{BadWidths}.
SirenModel init_siren(std::vector<std::size_t> widths, double omega0, std::uint64_t seed);

/// Throws Error{BadWidths | LevelCountMismatch}.
AsmrModel init_asmr(std::vector<std::size_t> widths, double omega0, PartitionScheme scheme, std::uint64_t seed);

/// [n, d] normalized level-`level` coordinates of the given grid points (row-major linear indices).
Tensor level_inputs(const PartitionScheme& scheme, std::size_t level, std::span<const std::int64_t> indices);

/// [B_level^(0), ..., B_level^(d-1), d] normalized lattice of one level.
Tensor level_lattice(const PartitionScheme& scheme, std::size_t level);

/// [prod N, d] coordinates mapped per axis to [-1, 1], row-major.
Tensor siren_coordinates(std::span<const std::int64_t> extents);
/// Subset of siren_coordinates selected by row-major linear indices.
Tensor siren_coordinates(std::span<const std::int64_t> extents, std::span<const std::int64_t> indices);

/// Per-coordinate evaluation of the hierarchical network. `indices` are
/// row-major linear indices into the scheme's grid. Output [n, d_L].
Tensor forward_naive(const AsmrModel& model, std::span<const std::int64_t> indices,
                     const InstanceModulation* phi = nullptr);
Tensor forward_naive(const AsmrModel& model, std::span<const Coord> coords, const InstanceModulation* phi = nullptr);

/// Activation-sharing evaluation of the whole grid. Output [prod N, d_L] in
/// row-major grid order.
Tensor forward_shared(const AsmrModel& model, const InstanceModulation* phi = nullptr);

/// Output [n, d_L] for coordinates [n, d_0]. Throws Error{ShapeMismatch}.
Tensor forward_siren(const SirenModel& model, const Tensor& coords);

/// Differentiable variants: parameters (and phi, when given) receive gradients.
/// forward_shared returns the output in grid shape [N_0, ..., N_{d-1}, d_L].
Var forward_naive(Tape& tape, AsmrModel& model, std::span<const std::int64_t> indices,
                  InstanceModulation* phi = nullptr);
Var forward_shared(Tape& tape, AsmrModel& model, InstanceModulation* phi = nullptr);
Var forward_siren(Tape& tape, SirenModel& model, const Tensor& coords);

/// Multiply-accumulates actually executed by one shared forward pass.
std::uint64_t count_shared_macs(const AsmrModel& model);

// Checkpoints: magic "ASMR1", u32 LE header length, a key=value text header
// (kind, widths, omega0, scheme, params), then little-endian f64 parameter
// blocks in parameters() order.

std::string serialize(const SirenModel& model);
std::string serialize(const AsmrModel& model);
/// Throws Error{CorruptCheckpoint | VersionMismatch}.
std::variant<SirenModel, AsmrModel> deserialize(std::string_view bytes);

void save(const SirenModel& model, const std::filesystem::path& path);
void save(const AsmrModel& model, const std::filesystem::path& path);
std::variant<SirenModel, AsmrModel> load_model(const std::filesystem::path& path);
/// Throws Error{VersionMismatch} if the file holds the other model kind.
SirenModel load_siren(const std::filesystem::path& path);
AsmrModel load_asmr(const std::filesystem::path& path);

}  // namespace asmr
