#include "asmr/train.hpp"

#include <chrono>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include "asmr/error.hpp"
#include "asmr/metrics.hpp"

namespace asmr {

namespace {

std::string shape_text(const std::vector<std::int64_t>& extents) {
  std::string s;
  for (std::size_t i = 0; i < extents.size(); ++i) {
    if (i != 0) s += "x";
    s += std::to_string(extents[i]);
  }
  return s;
}

Tensor gather_rows(const Tensor& grid, std::span<const std::int64_t> indices) {
  const std::size_t c = grid.cols();
  Tensor out(Shape{indices.size(), c});
  for (std::size_t r = 0; r < indices.size(); ++r) {
    for (std::size_t k = 0; k < c; ++k) out.at(r, k) = grid[static_cast<std::size_t>(indices[r]) * c + k];
  }
  return out;
}

/// Shared driver: `step(indices)` runs one differentiable forward on the
/// sampled indices (empty = full grid) and returns the loss; `full_loss`
/// evaluates the current model on the whole grid without gradients.
template <typename Step, typename FullLoss>
FitResult run_fit(std::vector<Tensor*> params, const Grid& target, const TrainConfig& config, Step&& step,
                  FullLoss&& full_loss, const LogCallback& on_log) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  Adam optimizer(std::move(params), config.adam);
  std::mt19937_64 rng(config.seed);
  std::uniform_int_distribution<std::int64_t> pick(0, target.points() - 1);
  std::vector<std::int64_t> batch;

  FitResult result;
  result.losses.reserve(config.iterations);
  auto log = [&](std::uint64_t iter, double loss, double lr) {
    LogRecord rec{iter, loss, native_psnr(loss, target), lr};
    result.records.push_back(rec);
    if (on_log) on_log(rec);
  };

  for (std::uint64_t t = 0; t < config.iterations; ++t) {
    const double lr = cosine_lr(t, config.iterations, config.lr, config.lr_min);
    if (config.batch != 0) {
      batch.resize(config.batch);
      for (auto& i : batch) i = pick(rng);
    }
    optimizer.zero_grad();
    const double loss = step(std::span<const std::int64_t>(batch));
    if (!std::isfinite(loss)) {
      throw Error(ErrorCode::NumericFailure, "loss became " + std::to_string(loss) + " at iteration " +
                                                 std::to_string(t));
    }
    result.losses.push_back(loss);
    if (t % config.log_every == 0) log(t, loss, lr);
    optimizer.step(lr);
  }
  const double final_loss = full_loss();
  if (!std::isfinite(final_loss)) throw Error(ErrorCode::NumericFailure, "final loss is not finite");
  log(config.iterations, final_loss, cosine_lr(config.iterations, config.iterations, config.lr, config.lr_min));
  result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state, double lr,
               const AdamConfig& config) {
  if (params.size() != grads.size()) throw Error(ErrorCode::ShapeMismatch, "adam: params and grads differ in size");
  if (state.m.empty() && state.v.empty()) {
    state.m.assign(params.size(), 0.0);
    state.v.assign(params.size(), 0.0);
  }
  if (state.m.size() != params.size() || state.v.size() != params.size()) {
    throw Error(ErrorCode::ShapeMismatch, "adam: state does not match parameter block");
  }
  ++state.t;
  const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = config.beta1 * state.m[i] + (1.0 - config.beta1) * grads[i];
    state.v[i] = config.beta2 * state.v[i] + (1.0 - config.beta2) * grads[i] * grads[i];
    const double m_hat = state.m[i] / c1;
    const double v_hat = state.v[i] / c2;
    params[i] -= lr * m_hat / (std::sqrt(v_hat) + config.epsilon);
  }
}

Adam::Adam(std::vector<Tensor*> params, AdamConfig config)
    : params_(std::move(params)), states_(params_.size()), config_(config) {}

void Adam::step(double lr) {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Tensor& p = *params_[i];
    adam_step(p.data(), p.grad(), states_[i], lr, config_);
  }
}

void Adam::zero_grad() {
  for (auto* p : params_) {
    p->grad();
    p->zero_grad();
  }
}

double cosine_lr(std::uint64_t t, std::uint64_t total, double lr_max, double lr_min) noexcept {
  if (total == 0) return lr_max;
  const double phase = std::numbers::pi * static_cast<double>(t) / static_cast<double>(total);
  return lr_min + 0.5 * (lr_max - lr_min) * (1.0 + std::cos(phase));
}

void TrainConfig::validate() const {
  if (iterations < 1) throw Error(ErrorCode::ConfigError, "iterations must be >= 1");
  if (!(lr_min > 0.0) || !(lr_min <= lr)) throw Error(ErrorCode::ConfigError, "need 0 < lr_min <= lr");
  if (log_every < 1) throw Error(ErrorCode::ConfigError, "log_every must be >= 1");
}

std::string FitResult::metrics_csv() const {
  std::ostringstream ss;
  ss.precision(17);
  ss << "iter,loss,psnr,lr\n";
  for (const auto& r : records) ss << r.iter << ',' << r.loss << ',' << r.psnr << ',' << r.lr << '\n';
  return ss.str();
}

double native_psnr(double normalized_mse, const Grid& target) noexcept {
  // Unsigned data spans 2 normalized units per peak, signed data 1.
  const double scale = target.is_signed ? 1.0 : 0.5;
  return psnr_from_mse(normalized_mse * scale * scale, 1.0);
}

FitResult fit(AsmrModel& model, const Grid& target, const TrainConfig& config, const LogCallback& on_log) {
  target.validate();
  if (target.extents != model.scheme.extents() || target.channels != model.backbone.widths.back()) {
    throw Error(ErrorCode::ExtentMismatch, "target " + shape_text(target.extents) + "x" +
                                               std::to_string(target.channels) + " vs scheme " +
                                               shape_text(model.scheme.extents()) + " with " +
                                               std::to_string(model.backbone.widths.back()) + " output(s)");
  }
  const Tensor full_target = target.normalized();
  auto step = [&](std::span<const std::int64_t> batch) {
    Tape tape;
    Var out = batch.empty() ? forward_shared(tape, model) : forward_naive(tape, model, batch);
    Var goal = tape.constant(batch.empty() ? full_target : gather_rows(full_target, batch));
    Var loss = tape.mse(out, goal);
    tape.backward(loss);
    return loss.value()[0];
  };
  auto full_loss = [&] {
    const Tensor out = forward_shared(model);
    return ops::mse(out, full_target.reshaped(out.shape()))[0];
  };
  return run_fit(model.parameters(), target, config, step, full_loss, on_log);
}

FitResult fit(SirenModel& model, const Grid& target, const TrainConfig& config, const LogCallback& on_log) {
  target.validate();
  if (target.dims() != model.widths.front() || target.channels != model.widths.back()) {
    throw Error(ErrorCode::ExtentMismatch, "target " + shape_text(target.extents) + "x" +
                                               std::to_string(target.channels) + " for a SIREN with " +
                                               std::to_string(model.widths.front()) + " input(s) and " +
                                               std::to_string(model.widths.back()) + " output(s)");
  }
  const Tensor full_target = target.normalized();
  const Tensor flat_target = full_target.reshaped(Shape{full_target.rows(), full_target.cols()});
  const Tensor all_coords = siren_coordinates(target.extents);
  auto step = [&](std::span<const std::int64_t> batch) {
    Tape tape;
    const Tensor coords = batch.empty() ? Tensor{} : siren_coordinates(target.extents, batch);
    Var out = forward_siren(tape, model, batch.empty() ? all_coords : coords);
    Var goal = batch.empty() ? tape.view(flat_target) : tape.constant(gather_rows(flat_target, batch));
    Var loss = tape.mse(out, goal);
    tape.backward(loss);
    return loss.value()[0];
  };
  auto full_loss = [&] { return ops::mse(forward_siren(model, all_coords), flat_target)[0]; };
  return run_fit(model.parameters(), target, config, step, full_loss, on_log);
}

Grid reconstruct(const AsmrModel& model, const Grid& like) { return Grid::denormalize(forward_shared(model), like); }

Grid reconstruct(const SirenModel& model, const Grid& like) {
  return Grid::denormalize(forward_siren(model, siren_coordinates(like.extents)), like);
}

}  // namespace asmr
