#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace asmr {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape) noexcept;

/// Dense row-major array of doubles with an optional same-shape gradient slot.
///
/// Matrix-style ops view a tensor of shape [s_0, ..., s_{k-1}, c] as
/// rows() = s_0 * ... * s_{k-1} by cols() = c. Grid ops treat the leading k
/// axes as spatial and the last axis as channels.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> data);

  [[nodiscard]] const Shape& shape() const noexcept { return shape_; }
  [[nodiscard]] std::size_t rank() const noexcept { return shape_.size(); }
  [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }
  [[nodiscard]] std::size_t cols() const noexcept { return shape_.empty() ? 1 : shape_.back(); }
  [[nodiscard]] std::size_t rows() const noexcept { return cols() == 0 ? 0 : size() / cols(); }

  [[nodiscard]] std::span<double> data() noexcept { return data_; }
  [[nodiscard]] std::span<const double> data() const noexcept { return data_; }
  [[nodiscard]] std::vector<double>& values() noexcept { return data_; }
  [[nodiscard]] const std::vector<double>& values() const noexcept { return data_; }

  double& operator[](std::size_t i) noexcept { return data_[i]; }
  double operator[](std::size_t i) const noexcept { return data_[i]; }
  double& at(std::size_t r, std::size_t c) noexcept { return data_[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const noexcept { return data_[r * cols() + c]; }

  [[nodiscard]] bool has_grad() const noexcept { return !grad_.empty(); }
  /// Allocates a zero gradient if none is present.
  std::vector<double>& grad();
  [[nodiscard]] const std::vector<double>& grad() const noexcept { return grad_; }
  void zero_grad() noexcept;
  void drop_grad() noexcept { grad_.clear(); grad_.shrink_to_fit(); }

  /// Same data, new shape of equal size.
  [[nodiscard]] Tensor reshaped(Shape shape) const;

 private:
  Shape shape_;
  std::vector<double> data_;
  std::vector<double> grad_;
};

/// Value-level kernels and their adjoints. Gradient outputs are accumulated
/// (+=), never overwritten.
namespace ops {

/// x[..., p] * W[p, q] (+ b[q]) -> [..., q]. `bias` may be null.
Tensor affine(const Tensor& x, const Tensor& weight, const Tensor* bias);
void affine_backward(const Tensor& x, const Tensor& weight, std::span<const double> grad_out,
                     double* grad_x, double* grad_weight, double* grad_bias);

/// Number of multiply-accumulates performed by affine(x, weight, ...).
std::uint64_t affine_macs(const Tensor& x, const Tensor& weight) noexcept;

/// sin(omega0 * x).
Tensor sine(const Tensor& x, double omega0);
void sine_backward(const Tensor& x, double omega0, std::span<const double> grad_out, double* grad_x);

/// Block replication on the spatial axes: out[j] = in[j / r] per axis.
Tensor upsample_nearest(const Tensor& x, std::span<const std::size_t> factors);
void upsample_nearest_backward(const Shape& in_shape, std::span<const std::size_t> factors,
                               std::span<const double> grad_out, double* grad_x);

/// Whole-grid repetition on the spatial axes: out[j] = in[j mod n] per axis.
Tensor tile_replicate(const Tensor& x, std::span<const std::size_t> factors);
void tile_replicate_backward(const Shape& in_shape, std::span<const std::size_t> factors,
                             std::span<const double> grad_out, double* grad_x);

Tensor add(const Tensor& x, const Tensor& y);
/// x[..., c] + v[c] on every row.
Tensor add_rows(const Tensor& x, const Tensor& v);

/// Mean of squared differences, as a scalar (rank-0) tensor.
Tensor mse(const Tensor& pred, const Tensor& target);
void mse_backward(const Tensor& pred, const Tensor& target, double grad_out, double* grad_pred);

}  // namespace ops

/// Handle to a value recorded on a Tape. Cheap to copy.
class Var {
 public:
  Var() = default;

  [[nodiscard]] Tensor& value() const noexcept { return *node_->tensor; }
  [[nodiscard]] bool requires_grad() const noexcept { return node_->requires_grad; }
  [[nodiscard]] explicit operator bool() const noexcept { return node_ != nullptr; }

 private:
  friend class Tape;
  struct Node {
    Tensor owned;
    Tensor* tensor = nullptr;
    bool requires_grad = false;
  };
  explicit Var(std::shared_ptr<Node> node) : node_(std::move(node)) {}
  std::shared_ptr<Node> node_;
};

/// Ordered record of differentiable ops for reverse-mode gradients.
///
/// A non-recording tape evaluates the same ops without keeping adjoint
/// closures, so intermediates are freed as soon as their Vars go away.
/// Every tape counts the multiply-accumulates of its affine/matmul ops.
class Tape {
 public:
  explicit Tape(bool record = true) : record_(record) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Owned constant; never receives gradients.
  Var constant(Tensor t);
  /// Non-owning leaf; gradients accumulate into `t.grad()` when recording.
  Var parameter(Tensor& t);
  /// Non-owning leaf that never receives gradients.
  Var view(const Tensor& t);

  Var affine(const Var& x, const Var& weight, const Var& bias);
  Var matmul(const Var& x, const Var& weight);
  Var sine(const Var& x, double omega0);
  Var upsample_nearest(const Var& x, std::vector<std::size_t> factors);
  Var tile_replicate(const Var& x, std::vector<std::size_t> factors);
  Var add(const Var& x, const Var& y);
  Var add_rows(const Var& x, const Var& v);
  Var mse(const Var& pred, const Var& target);

  /// Seeds d(loss)/d(loss) = 1 and replays the record in reverse.
  void backward(const Var& loss);

  [[nodiscard]] bool recording() const noexcept { return record_; }
  [[nodiscard]] std::size_t recorded_ops() const noexcept { return steps_.size(); }
  [[nodiscard]] std::uint64_t macs() const noexcept { return macs_; }

 private:
  Var make_output(Tensor value, std::initializer_list<const Var*> inputs);
  void record(std::function<void()> step) { steps_.push_back(std::move(step)); }
  static double* grad_or_null(const std::shared_ptr<Var::Node>& node);

  bool record_;
  std::uint64_t macs_ = 0;
  std::vector<std::function<void()>> steps_;
};

}  // namespace asmr
