#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "asmr/dataio.hpp"
#include "asmr/model.hpp"
#include "asmr/tensor.hpp"

namespace asmr {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t t = 0;
};

/// One bias-corrected Adam update of a flat parameter block. A fresh (empty)
/// state is sized on first use. Throws Error{ShapeMismatch}.
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state, double lr,
               const AdamConfig& config = {});

/// Adam over a fixed list of tensors, reading each tensor's gradient slot.
class Adam {
 public:
  explicit Adam(std::vector<Tensor*> params, AdamConfig config = {});

  void step(double lr);
  void zero_grad();

  [[nodiscard]] std::uint64_t steps() const noexcept { return states_.empty() ? 0 : states_.front().t; }

 private:
  std::vector<Tensor*> params_;
  std::vector<AdamState> states_;
  AdamConfig config_;
};

/// lr_min + (lr_max - lr_min) (1 + cos(pi t / T)) / 2.
double cosine_lr(std::uint64_t t, std::uint64_t total, double lr_max, double lr_min) noexcept;

struct TrainConfig {
  std::uint64_t iterations = 10000;
  double lr = 1e-4;
  double lr_min = 1e-6;
  AdamConfig adam;
  std::uint64_t batch = 0;  // 0: full grid; otherwise coordinates sampled per step
  std::uint64_t seed = 0;
  std::uint64_t log_every = 100;

  /// Throws Error{ConfigError}.
  void validate() const;
};

struct LogRecord {
  std::uint64_t iter = 0;
  double loss = 0.0;  // MSE on the normalized scale
  double psnr = 0.0;  // dB in the target's native range
  double lr = 0.0;
};

struct FitResult {
  std::vector<LogRecord> records;
  std::vector<double> losses;  // every iteration
  double wall_seconds = 0.0;

  /// `iter,loss,psnr,lr` with a header row.
  [[nodiscard]] std::string metrics_csv() const;
};

/// Called after every logged record.
using LogCallback = std::function<void(const LogRecord&)>;

/// Fits `model` in place. Full-grid ASMR steps use the activation-sharing
/// forward; sampled steps use the per-coordinate forward. Records are logged
/// at every multiple of log_every and once more after the final update.
/// Throws Error{ExtentMismatch | NumericFailure | ConfigError}.
FitResult fit(AsmrModel& model, const Grid& target, const TrainConfig& config, const LogCallback& on_log = {});
FitResult fit(SirenModel& model, const Grid& target, const TrainConfig& config, const LogCallback& on_log = {});

/// Reconstructions in the target's native range.
Grid reconstruct(const AsmrModel& model, const Grid& like);
Grid reconstruct(const SirenModel& model, const Grid& like);

/// PSNR in the native range for an MSE measured on the normalized scale.
double native_psnr(double normalized_mse, const Grid& target) noexcept;

}  // namespace asmr
