#include "asmr/tensor.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "asmr/error.hpp"
#include "sine_kernels.hpp"

namespace asmr {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;
using MatrixMap = Eigen::Map<RowMatrix>;

// Products run on row blocks copied into Eigen's own aligned storage, so the
// kernel path, and with it the summation order, never depends on where a
// tensor's buffer happens to start.
constexpr Eigen::Index kRowBlock = 1024;

std::string shape_string(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i != 0) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw Error(ErrorCode::ShapeMismatch,
                std::string(op) + ": " + shape_string(a.shape()) + " vs " + shape_string(b.shape()));
  }
}

enum class Replication { Block, Tile };

/// Maps every output cell of a replicated grid to its source cell and hands
/// (source offset, output offset) pairs of channel runs to `visit`.
class ReplicationWalk {
 public:
  ReplicationWalk(const Shape& in_shape, std::span<const std::size_t> factors, Replication mode)
      : in_shape_(in_shape), factors_(factors.begin(), factors.end()), mode_(mode) {
    if (in_shape.empty() || factors.size() + 1 != in_shape.size()) {
      throw Error(ErrorCode::BadFactor, "need one factor per spatial axis of " + shape_string(in_shape));
    }
    for (auto f : factors) {
      if (f < 1) throw Error(ErrorCode::BadFactor, "replication factor must be >= 1");
    }
    const std::size_t k = factors_.size();
    out_shape_ = in_shape;
    for (std::size_t a = 0; a < k; ++a) out_shape_[a] = in_shape[a] * factors_[a];
    in_strides_.assign(k + 1, 1);
    out_strides_.assign(k + 1, 1);
    for (std::size_t a = k; a-- > 0;) {
      in_strides_[a] = in_strides_[a + 1] * in_shape_[a + 1];
      out_strides_[a] = out_strides_[a + 1] * out_shape_[a + 1];
    }
  }

  [[nodiscard]] const Shape& out_shape() const noexcept { return out_shape_; }
  [[nodiscard]] std::size_t channels() const noexcept { return in_shape_.back(); }

  template <typename Visit>
  void run(Visit&& visit) const {
    walk(0, 0, 0, visit);
  }

 private:
  template <typename Visit>
  void walk(std::size_t axis, std::size_t in_off, std::size_t out_off, Visit& visit) const {
    if (axis == factors_.size()) {
      visit(in_off, out_off);
      return;
    }
    const std::size_t n = in_shape_[axis];
    const std::size_t r = factors_[axis];
    for (std::size_t j = 0; j < out_shape_[axis]; ++j) {
      const std::size_t i = mode_ == Replication::Block ? j / r : j % n;
      walk(axis + 1, in_off + i * in_strides_[axis], out_off + j * out_strides_[axis], visit);
    }
  }

  Shape in_shape_;
  std::vector<std::size_t> factors_;
  Replication mode_;
  Shape out_shape_;
  std::vector<std::size_t> in_strides_;
  std::vector<std::size_t> out_strides_;
};

Tensor replicate(const Tensor& x, std::span<const std::size_t> factors, Replication mode) {
  const ReplicationWalk walk(x.shape(), factors, mode);
  Tensor out(walk.out_shape());
  const std::size_t c = walk.channels();
  const double* src = x.data().data();
  double* dst = out.data().data();
  walk.run([&](std::size_t in_off, std::size_t out_off) {
    std::copy_n(src + in_off, c, dst + out_off);
  });
  return out;
}

void replicate_backward(const Shape& in_shape, std::span<const std::size_t> factors, Replication mode,
                        std::span<const double> grad_out, double* grad_x) {
  const ReplicationWalk walk(in_shape, factors, mode);
  if (grad_out.size() != shape_size(walk.out_shape())) {
    throw Error(ErrorCode::ShapeMismatch, "upstream gradient does not match replicated shape");
  }
  const std::size_t c = walk.channels();
  walk.run([&](std::size_t in_off, std::size_t out_off) {
    for (std::size_t k = 0; k < c; ++k) grad_x[in_off + k] += grad_out[out_off + k];
  });
}

}  // namespace

std::size_t shape_size(const Shape& shape) noexcept {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)), data_(shape_size(shape_), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
  if (data_.size() != shape_size(shape_)) {
    throw Error(ErrorCode::ShapeMismatch, "data length " + std::to_string(data_.size()) + " for shape " +
                                              shape_string(shape_));
  }
}

std::vector<double>& Tensor::grad() {
  if (grad_.size() != data_.size()) grad_.assign(data_.size(), 0.0);
  return grad_;
}

void Tensor::zero_grad() noexcept { std::fill(grad_.begin(), grad_.end(), 0.0); }

Tensor Tensor::reshaped(Shape shape) const {
  if (shape_size(shape) != size()) {
    throw Error(ErrorCode::ShapeMismatch, "cannot reshape " + shape_string(shape_) + " to " + shape_string(shape));
  }
  return Tensor(std::move(shape), data_);
}

namespace ops {

Tensor affine(const Tensor& x, const Tensor& weight, const Tensor* bias) {
  if (weight.rank() != 2 || x.rank() == 0 || x.cols() != weight.shape()[0]) {
    throw Error(ErrorCode::ShapeMismatch, "affine: x " + shape_string(x.shape()) + " with W " +
                                              shape_string(weight.shape()));
  }
  const auto n = static_cast<Eigen::Index>(x.rows());
  const auto p = static_cast<Eigen::Index>(weight.shape()[0]);
  const auto q = static_cast<Eigen::Index>(weight.shape()[1]);
  if (bias != nullptr && bias->size() != static_cast<std::size_t>(q)) {
    throw Error(ErrorCode::ShapeMismatch, "affine: bias " + shape_string(bias->shape()) + " for " +
                                              std::to_string(q) + " outputs");
  }
  Shape out_shape = x.shape();
  out_shape.back() = static_cast<std::size_t>(q);
  Tensor out(std::move(out_shape));
  const RowMatrix w = ConstMatrixMap(weight.data().data(), p, q);
  RowMatrix xb;
  RowMatrix ob;
  for (Eigen::Index start = 0; start < n; start += kRowBlock) {
    const Eigen::Index rows = std::min(kRowBlock, n - start);
    xb = ConstMatrixMap(x.data().data() + start * p, rows, p);
    ob.noalias() = xb * w;
    MatrixMap(out.data().data() + start * q, rows, q) = ob;
  }
  if (bias != nullptr) {
    const double* b = bias->data().data();
    for (Eigen::Index r = 0; r < n; ++r)
      for (Eigen::Index c = 0; c < q; ++c) out[static_cast<std::size_t>(r * q + c)] += b[c];
  }
  return out;
}

void affine_backward(const Tensor& x, const Tensor& weight, std::span<const double> grad_out, double* grad_x,
                     double* grad_weight, double* grad_bias) {
  const auto n = static_cast<Eigen::Index>(x.rows());
  const auto p = static_cast<Eigen::Index>(weight.shape()[0]);
  const auto q = static_cast<Eigen::Index>(weight.shape()[1]);
  if (grad_out.size() != static_cast<std::size_t>(n * q)) {
    throw Error(ErrorCode::ShapeMismatch, "affine_backward: upstream gradient size");
  }
  const RowMatrix wt = ConstMatrixMap(weight.data().data(), p, q).transpose();
  RowMatrix gw = RowMatrix::Zero(grad_weight != nullptr ? p : 0, grad_weight != nullptr ? q : 0);
  RowMatrix gb;
  RowMatrix xb;
  RowMatrix tmp;
  for (Eigen::Index start = 0; start < n; start += kRowBlock) {
    const Eigen::Index rows = std::min(kRowBlock, n - start);
    gb = ConstMatrixMap(grad_out.data() + start * q, rows, q);
    if (grad_x != nullptr) {
      tmp.noalias() = gb * wt;
      MatrixMap(grad_x + start * p, rows, p) += tmp;
    }
    if (grad_weight != nullptr) {
      xb = ConstMatrixMap(x.data().data() + start * p, rows, p);
      gw.noalias() += xb.transpose() * gb;
    }
  }
  if (grad_weight != nullptr) MatrixMap(grad_weight, p, q) += gw;
  if (grad_bias != nullptr) {
    for (Eigen::Index r = 0; r < n; ++r)
      for (Eigen::Index c = 0; c < q; ++c) grad_bias[c] += grad_out[static_cast<std::size_t>(r * q + c)];
  }
}

std::uint64_t affine_macs(const Tensor& x, const Tensor& weight) noexcept {
  return static_cast<std::uint64_t>(x.rows()) * weight.shape()[0] * weight.shape()[1];
}

Tensor sine(const Tensor& x, double omega0) {
  Tensor out(x.shape());
  detail::sin_scaled(x.data().data(), out.data().data(), x.size(), omega0);
  return out;
}

void sine_backward(const Tensor& x, double omega0, std::span<const double> grad_out, double* grad_x) {
  Tensor value(x.shape());
  std::vector<double> slope(x.size());
  detail::sin_slope_scaled(x.data().data(), value.data().data(), slope.data(), x.size(), omega0);
  for (std::size_t i = 0; i < slope.size(); ++i) grad_x[i] += slope[i] * grad_out[i];
}

Tensor upsample_nearest(const Tensor& x, std::span<const std::size_t> factors) {
  return replicate(x, factors, Replication::Block);
}

void upsample_nearest_backward(const Shape& in_shape, std::span<const std::size_t> factors,
                               std::span<const double> grad_out, double* grad_x) {
  replicate_backward(in_shape, factors, Replication::Block, grad_out, grad_x);
}

Tensor tile_replicate(const Tensor& x, std::span<const std::size_t> factors) {
  return replicate(x, factors, Replication::Tile);
}

void tile_replicate_backward(const Shape& in_shape, std::span<const std::size_t> factors,
                             std::span<const double> grad_out, double* grad_x) {
  replicate_backward(in_shape, factors, Replication::Tile, grad_out, grad_x);
}

Tensor add(const Tensor& x, const Tensor& y) {
  require_same_shape(x, y, "add");
  Tensor out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + y[i];
  return out;
}

Tensor add_rows(const Tensor& x, const Tensor& v) {
  if (v.size() != x.cols()) {
    throw Error(ErrorCode::ShapeMismatch, "add_rows: " + shape_string(v.shape()) + " onto " + shape_string(x.shape()));
  }
  Tensor out(x.shape());
  const std::size_t c = x.cols();
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (std::size_t k = 0; k < c; ++k) out[r * c + k] = x[r * c + k] + v[k];
  }
  return out;
}

Tensor mse(const Tensor& pred, const Tensor& target) {
  require_same_shape(pred, target, "mse");
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double e = pred[i] - target[i];
    sum += e * e;
  }
  return Tensor(Shape{}, std::vector<double>{pred.size() == 0 ? 0.0 : sum / static_cast<double>(pred.size())});
}

void mse_backward(const Tensor& pred, const Tensor& target, double grad_out, double* grad_pred) {
  require_same_shape(pred, target, "mse_backward");
  const double scale = 2.0 * grad_out / static_cast<double>(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) grad_pred[i] += scale * (pred[i] - target[i]);
}

}  // namespace ops

Var Tape::constant(Tensor t) {
  auto node = std::make_shared<Var::Node>();
  node->owned = std::move(t);
  node->tensor = &node->owned;
  return Var(std::move(node));
}

Var Tape::parameter(Tensor& t) {
  auto node = std::make_shared<Var::Node>();
  node->tensor = &t;
  node->requires_grad = record_;
  return Var(std::move(node));
}

Var Tape::view(const Tensor& t) {
  auto node = std::make_shared<Var::Node>();
  // Never written through: a node without requires_grad receives no gradient.
  node->tensor = const_cast<Tensor*>(&t);
  return Var(std::move(node));
}

Var Tape::make_output(Tensor value, std::initializer_list<const Var*> inputs) {
  auto node = std::make_shared<Var::Node>();
  node->owned = std::move(value);
  node->tensor = &node->owned;
  if (record_) {
    for (const Var* in : inputs) {
      if (in != nullptr && *in && in->requires_grad()) node->requires_grad = true;
    }
  }
  return Var(std::move(node));
}

double* Tape::grad_or_null(const std::shared_ptr<Var::Node>& node) {
  return node && node->requires_grad ? node->tensor->grad().data() : nullptr;
}

Var Tape::affine(const Var& x, const Var& weight, const Var& bias) {
  Var out = make_output(ops::affine(x.value(), weight.value(), bias ? &bias.value() : nullptr), {&x, &weight, &bias});
  macs_ += ops::affine_macs(x.value(), weight.value());
  if (out.requires_grad()) {
    record([xn = x.node_, wn = weight.node_, bn = bias.node_, on = out.node_] {
      if (!on->tensor->has_grad()) return;
      ops::affine_backward(*xn->tensor, *wn->tensor, on->tensor->grad(), grad_or_null(xn), grad_or_null(wn),
                           grad_or_null(bn));
    });
  }
  return out;
}

Var Tape::matmul(const Var& x, const Var& weight) { return affine(x, weight, Var{}); }

Var Tape::sine(const Var& x, double omega0) {
  if (!record_ || !x.requires_grad()) return make_output(ops::sine(x.value(), omega0), {&x});
  Tensor value(x.value().shape());
  std::vector<double> slope(value.size());
  detail::sin_slope_scaled(x.value().data().data(), value.data().data(), slope.data(), value.size(), omega0);
  Var out = make_output(std::move(value), {&x});
  record([xn = x.node_, on = out.node_, slope = std::move(slope)] {
    if (!on->tensor->has_grad()) return;
    const auto& g = on->tensor->grad();
    double* gx = xn->tensor->grad().data();
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += slope[i] * g[i];
  });
  return out;
}

Var Tape::upsample_nearest(const Var& x, std::vector<std::size_t> factors) {
  Var out = make_output(ops::upsample_nearest(x.value(), factors), {&x});
  if (out.requires_grad()) {
    record([xn = x.node_, on = out.node_, f = std::move(factors)] {
      if (!on->tensor->has_grad()) return;
      ops::upsample_nearest_backward(xn->tensor->shape(), f, on->tensor->grad(), xn->tensor->grad().data());
    });
  }
  return out;
}

Var Tape::tile_replicate(const Var& x, std::vector<std::size_t> factors) {
  Var out = make_output(ops::tile_replicate(x.value(), factors), {&x});
  if (out.requires_grad()) {
    record([xn = x.node_, on = out.node_, f = std::move(factors)] {
      if (!on->tensor->has_grad()) return;
      ops::tile_replicate_backward(xn->tensor->shape(), f, on->tensor->grad(), xn->tensor->grad().data());
    });
  }
  return out;
}

Var Tape::add(const Var& x, const Var& y) {
  Var out = make_output(ops::add(x.value(), y.value()), {&x, &y});
  if (out.requires_grad()) {
    record([xn = x.node_, yn = y.node_, on = out.node_] {
      if (!on->tensor->has_grad()) return;
      const auto& g = on->tensor->grad();
      for (auto* dst : {grad_or_null(xn), grad_or_null(yn)}) {
        if (dst == nullptr) continue;
        for (std::size_t i = 0; i < g.size(); ++i) dst[i] += g[i];
      }
    });
  }
  return out;
}

Var Tape::add_rows(const Var& x, const Var& v) {
  Var out = make_output(ops::add_rows(x.value(), v.value()), {&x, &v});
  if (out.requires_grad()) {
    record([xn = x.node_, vn = v.node_, on = out.node_] {
      if (!on->tensor->has_grad()) return;
      const auto& g = on->tensor->grad();
      if (double* dx = grad_or_null(xn)) {
        for (std::size_t i = 0; i < g.size(); ++i) dx[i] += g[i];
      }
      if (double* dv = grad_or_null(vn)) {
        const std::size_t c = on->tensor->cols();
        for (std::size_t i = 0; i < g.size(); ++i) dv[i % c] += g[i];
      }
    });
  }
  return out;
}

Var Tape::mse(const Var& pred, const Var& target) {
  Var out = make_output(ops::mse(pred.value(), target.value()), {&pred});
  if (out.requires_grad()) {
    record([pn = pred.node_, tn = target.node_, on = out.node_] {
      if (!on->tensor->has_grad()) return;
      ops::mse_backward(*pn->tensor, *tn->tensor, on->tensor->grad()[0], pn->tensor->grad().data());
    });
  }
  return out;
}

void Tape::backward(const Var& loss) {
  if (!record_) throw Error(ErrorCode::ShapeMismatch, "backward on a non-recording tape");
  if (loss.value().size() != 1) throw Error(ErrorCode::ShapeMismatch, "backward needs a scalar loss");
  if (!loss.requires_grad()) return;
  loss.value().grad()[0] += 1.0;
  for (auto it = steps_.rbegin(); it != steps_.rend(); ++it) (*it)();
}

}  // namespace asmr
