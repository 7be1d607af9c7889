#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>

#include "cganseg/autodiff.hpp"
#include "cganseg/errors.hpp"
#include "cganseg/kernels.hpp"

namespace cganseg {

bool Tape::tracks(std::initializer_list<const Tensor*> inputs) const {
  if (!recording()) return false;
  return std::any_of(inputs.begin(), inputs.end(), [](const Tensor* t) { return t->requires_grad(); });
}

void Tape::record(const Tensor& output, std::function<void()> backward) {
  if (consumed_) throw TapeError("tape already consumed");
  entries_.push_back({output, std::move(backward)});
}

void Tape::backward(const Tensor& loss) {
  if (consumed_) throw TapeError("tape already consumed");
  if (!loss.defined() || loss.numel() != 1) {
    throw TapeError("backward() needs a scalar loss, got shape " +
                    (loss.defined() ? shape_to_string(loss.shape()) : std::string("<undefined>")));
  }
  auto it = std::find_if(entries_.rbegin(), entries_.rend(),
                         [&](const Entry& e) { return e.output.same_storage(loss); });
  if (it == entries_.rend()) throw TapeError("loss was not produced on this tape");
  loss.grad_mut()[0] += 1.0;
  for (; it != entries_.rend(); ++it) it->backward();
  consumed_ = true;
  entries_.clear();
  entries_.shrink_to_fit();
}

namespace {

using Index = std::int64_t;
constexpr Index kParallelThreshold = 1 << 15;

Tensor make_output(Tape& tape, Shape shape, std::initializer_list<const Tensor*> inputs) {
  return Tensor(std::move(shape), tape.tracks(inputs));
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_to_string(a.shape()) + " vs " +
                     shape_to_string(b.shape()));
  }
}

// Unary elementwise op given value and local-derivative functors. The
// derivative receives (input, output).
template <typename Fn, typename Deriv>
Tensor unary(Tape& tape, const Tensor& a, const char* name, Fn fn, Deriv deriv) {
  Tensor out = make_output(tape, a.shape(), {&a});
  auto x = a.data();
  auto y = out.data_mut();
  const Index n = static_cast<Index>(x.size());
#pragma omp parallel for schedule(static) if (n > kParallelThreshold)
  for (Index i = 0; i < n; ++i) y[i] = fn(x[i]);
  out.check_finite(name);
  if (out.requires_grad()) {
    tape.record(out, [a, out, deriv]() {
      auto gy = out.grad();
      auto gx = a.grad_mut();
      auto x = a.data();
      auto y = out.data();
      const Index n = static_cast<Index>(x.size());
#pragma omp parallel for schedule(static) if (n > kParallelThreshold)
      for (Index i = 0; i < n; ++i) gx[i] += gy[i] * deriv(x[i], y[i]);
    });
  }
  return out;
}

}  // namespace

Tensor detach(const Tensor& t) { return t.clone(); }

Tensor stack(std::span<const Tensor> items) {
  if (items.empty()) throw ShapeError("stack of zero tensors");
  Shape shape = items.front().shape();
  const std::size_t each = items.front().numel();
  std::vector<double> values;
  values.reserve(each * items.size());
  for (const Tensor& t : items) {
    if (t.shape() != shape) throw ShapeError("stack: tensors differ in shape");
    auto d = t.data();
    values.insert(values.end(), d.begin(), d.end());
  }
  shape.insert(shape.begin(), items.size());
  return Tensor(std::move(shape), std::move(values));
}

Tensor add(Tape& tape, const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  Tensor out = make_output(tape, a.shape(), {&a, &b});
  auto y = out.data_mut();
  auto x1 = a.data();
  auto x2 = b.data();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = x1[i] + x2[i];
  out.check_finite("add");
  if (out.requires_grad()) {
    tape.record(out, [a, b, out]() {
      auto gy = out.grad();
      if (a.requires_grad()) {
        auto g = a.grad_mut();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += gy[i];
      }
      if (b.requires_grad()) {
        auto g = b.grad_mut();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += gy[i];
      }
    });
  }
  return out;
}

Tensor sub(Tape& tape, const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  Tensor out = make_output(tape, a.shape(), {&a, &b});
  auto y = out.data_mut();
  auto x1 = a.data();
  auto x2 = b.data();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = x1[i] - x2[i];
  out.check_finite("sub");
  if (out.requires_grad()) {
    tape.record(out, [a, b, out]() {
      auto gy = out.grad();
      if (a.requires_grad()) {
        auto g = a.grad_mut();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += gy[i];
      }
      if (b.requires_grad()) {
        auto g = b.grad_mut();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] -= gy[i];
      }
    });
  }
  return out;
}

Tensor mul(Tape& tape, const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  Tensor out = make_output(tape, a.shape(), {&a, &b});
  auto y = out.data_mut();
  auto x1 = a.data();
  auto x2 = b.data();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = x1[i] * x2[i];
  out.check_finite("mul");
  if (out.requires_grad()) {
    tape.record(out, [a, b, out]() {
      auto gy = out.grad();
      if (a.requires_grad()) {
        auto g = a.grad_mut();
        auto other = b.data();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += gy[i] * other[i];
      }
      if (b.requires_grad()) {
        auto g = b.grad_mut();
        auto other = a.data();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += gy[i] * other[i];
      }
    });
  }
  return out;
}

Tensor scale(Tape& tape, const Tensor& a, double factor) {
  return unary(
      tape, a, "scale", [factor](double x) { return factor * x; }, [factor](double, double) { return factor; });
}

Tensor add_scalar(Tape& tape, const Tensor& a, double offset) {
  return unary(
      tape, a, "add_scalar", [offset](double x) { return x + offset; }, [](double, double) { return 1.0; });
}

Tensor relu(Tape& tape, const Tensor& a) {
  return unary(
      tape, a, "relu", [](double x) { return x > 0.0 ? x : 0.0; },
      [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Tensor leaky_relu(Tape& tape, const Tensor& a, double slope) {
  return unary(
      tape, a, "leaky_relu", [slope](double x) { return x > 0.0 ? x : slope * x; },
      [slope](double x, double) { return x > 0.0 ? 1.0 : slope; });
}

Tensor tanh(Tape& tape, const Tensor& a) {
  return unary(
      tape, a, "tanh", [](double x) { return std::tanh(x); }, [](double, double y) { return 1.0 - y * y; });
}

Tensor sigmoid(Tape& tape, const Tensor& a) {
  return unary(
      tape, a, "sigmoid",
      [](double x) {
        if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
        const double e = std::exp(x);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

Tensor abs(Tape& tape, const Tensor& a) {
  return unary(
      tape, a, "abs", [](double x) { return std::fabs(x); },
      [](double x, double) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); });
}

Tensor clamped_log(Tape& tape, const Tensor& a, double floor) {
  if (!(floor > 0.0)) throw InvalidArgument("clamped_log floor must be positive");
  return unary(
      tape, a, "clamped_log", [floor](double x) { return std::log(std::max(x, floor)); },
      [floor](double x, double) { return x > floor ? 1.0 / x : 0.0; });
}

Tensor sum(Tape& tape, const Tensor& a) {
  Tensor out = make_output(tape, {1}, {&a});
  double acc = 0.0;
  for (double v : a.data()) acc += v;
  out.data_mut()[0] = acc;
  out.check_finite("sum");
  if (out.requires_grad()) {
    tape.record(out, [a, out]() {
      const double gy = out.grad()[0];
      for (double& g : a.grad_mut()) g += gy;
    });
  }
  return out;
}

Tensor mean(Tape& tape, const Tensor& a) {
  return scale(tape, sum(tape, a), 1.0 / static_cast<double>(a.numel()));
}

Tensor concat(Tape& tape, std::span<const Tensor> parts, std::size_t axis) {
  if (parts.empty()) throw ShapeError("concat of zero tensors");
  const Shape& first = parts.front().shape();
  if (axis >= first.size()) throw ShapeError("concat axis " + std::to_string(axis) + " out of range");
  Shape shape = first;
  shape[axis] = 0;
  for (const Tensor& p : parts) {
    const Shape& s = p.shape();
    if (s.size() != first.size()) throw ShapeError("concat: rank mismatch");
    for (std::size_t d = 0; d < s.size(); ++d) {
      if (d != axis && s[d] != first[d]) {
        throw ShapeError("concat: incompatible shapes " + shape_to_string(first) + " and " + shape_to_string(s));
      }
    }
    shape[axis] += s[axis];
  }
  std::size_t outer = 1;
  for (std::size_t d = 0; d < axis; ++d) outer *= first[d];
  std::size_t inner = 1;
  for (std::size_t d = axis + 1; d < first.size(); ++d) inner *= first[d];

  bool tracked = false;
  for (const Tensor& p : parts) tracked = tracked || tape.tracks({&p});
  Tensor out(shape, tracked);
  auto y = out.data_mut();
  const std::size_t out_block = shape[axis] * inner;
  std::size_t offset = 0;
  for (const Tensor& p : parts) {
    const std::size_t block = p.dim(axis) * inner;
    auto x = p.data();
    for (std::size_t o = 0; o < outer; ++o) {
      std::copy_n(x.begin() + o * block, block, y.begin() + o * out_block + offset);
    }
    offset += block;
  }
  if (tracked) {
    std::vector<Tensor> inputs(parts.begin(), parts.end());
    tape.record(out, [inputs, out, outer, inner, out_block, axis]() {
      auto gy = out.grad();
      std::size_t offset = 0;
      for (const Tensor& p : inputs) {
        const std::size_t block = p.dim(axis) * inner;
        if (p.requires_grad()) {
          auto gx = p.grad_mut();
          for (std::size_t o = 0; o < outer; ++o) {
            for (std::size_t i = 0; i < block; ++i) gx[o * block + i] += gy[o * out_block + offset + i];
          }
        }
        offset += block;
      }
    });
  }
  return out;
}

Tensor reshape(Tape& tape, const Tensor& a, Shape shape) {
  if (shape_numel(shape) != a.numel()) {
    throw ShapeError("cannot reshape " + shape_to_string(a.shape()) + " to " + shape_to_string(shape));
  }
  Tensor out = make_output(tape, std::move(shape), {&a});
  std::copy(a.data().begin(), a.data().end(), out.data_mut().begin());
  if (out.requires_grad()) {
    tape.record(out, [a, out]() {
      auto gy = out.grad();
      auto gx = a.grad_mut();
      for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += gy[i];
    });
  }
  return out;
}

Tensor dropout(Tape& tape, const Tensor& a, double p, bool training, Rng& rng) {
  if (!(p >= 0.0 && p < 1.0)) throw InvalidArgument("dropout probability must lie in [0, 1)");
  if (!training || p == 0.0) return a;
  const double keep_scale = 1.0 / (1.0 - p);
  std::vector<double> mask(a.numel());
  for (double& m : mask) m = rng.bernoulli(p) ? 0.0 : keep_scale;
  Tensor out = make_output(tape, a.shape(), {&a});
  auto x = a.data();
  auto y = out.data_mut();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = x[i] * mask[i];
  if (out.requires_grad()) {
    tape.record(out, [a, out, mask = std::move(mask)]() {
      auto gy = out.grad();
      auto gx = a.grad_mut();
      for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += gy[i] * mask[i];
    });
  }
  return out;
}

Tensor conv2d(Tape& tape, const Tensor& input, const Tensor& kernel, int stride, int padding) {
  const kernels::ConvGeometry g = kernels::conv2d_geometry(input.shape(), kernel.shape(), stride, padding);
  Tensor out = make_output(tape, {g.batch, g.out_channels, g.out_h, g.out_w}, {&input, &kernel});
  kernels::conv2d_forward(g, input.data(), kernel.data(), out.data_mut());
  out.check_finite("conv2d");
  if (out.requires_grad()) {
    tape.record(out, [input, kernel, out, g]() {
      if (input.requires_grad()) kernels::conv2d_backward_input(g, out.grad(), kernel.data(), input.grad_mut());
      if (kernel.requires_grad()) kernels::conv2d_backward_kernel(g, input.data(), out.grad(), kernel.grad_mut());
    });
  }
  return out;
}

Tensor conv2d_transpose(Tape& tape, const Tensor& input, const Tensor& kernel, int stride, int padding) {
  const kernels::ConvGeometry g =
      kernels::conv2d_transpose_geometry(input.shape(), kernel.shape(), stride, padding);
  Tensor out = make_output(tape, {g.batch, g.in_channels, g.in_h, g.in_w}, {&input, &kernel});
  kernels::conv2d_backward_input(g, input.data(), kernel.data(), out.data_mut());
  out.check_finite("conv2d_transpose");
  if (out.requires_grad()) {
    tape.record(out, [input, kernel, out, g]() {
      if (input.requires_grad()) kernels::conv2d_forward(g, out.grad(), kernel.data(), input.grad_mut());
      if (kernel.requires_grad()) kernels::conv2d_backward_kernel(g, out.grad(), input.data(), kernel.grad_mut());
    });
  }
  return out;
}

Tensor add_channel_bias(Tape& tape, const Tensor& a, const Tensor& bias) {
  if (a.rank() < 2 || bias.rank() != 1 || bias.dim(0) != a.dim(1)) {
    throw ShapeError("add_channel_bias: bias " + shape_to_string(bias.shape()) + " does not match " +
                     shape_to_string(a.shape()));
  }
  const std::size_t batch = a.dim(0);
  const std::size_t channels = a.dim(1);
  const std::size_t inner = a.numel() / (batch * channels);
  Tensor out = make_output(tape, a.shape(), {&a, &bias});
  auto x = a.data();
  auto b = bias.data();
  auto y = out.data_mut();
  for (std::size_t n = 0; n < batch; ++n) {
    for (std::size_t c = 0; c < channels; ++c) {
      const std::size_t base = (n * channels + c) * inner;
      for (std::size_t i = 0; i < inner; ++i) y[base + i] = x[base + i] + b[c];
    }
  }
  out.check_finite("add_channel_bias");
  if (out.requires_grad()) {
    tape.record(out, [a, bias, out, batch, channels, inner]() {
      auto gy = out.grad();
      if (a.requires_grad()) {
        auto gx = a.grad_mut();
        for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += gy[i];
      }
      if (bias.requires_grad()) {
        auto gb = bias.grad_mut();
        for (std::size_t c = 0; c < channels; ++c) {
          double acc = 0.0;
          for (std::size_t n = 0; n < batch; ++n) {
            const std::size_t base = (n * channels + c) * inner;
            for (std::size_t i = 0; i < inner; ++i) acc += gy[base + i];
          }
          gb[c] += acc;
        }
      }
    });
  }
  return out;
}

Tensor linear(Tape& tape, const Tensor& x, const Tensor& weight, const Tensor& bias) {
  if (x.rank() != 2 || weight.rank() != 2 || bias.rank() != 1 || weight.dim(1) != x.dim(1) ||
      bias.dim(0) != weight.dim(0)) {
    throw ShapeError("linear: incompatible shapes x" + shape_to_string(x.shape()) + " w" +
                     shape_to_string(weight.shape()) + " b" + shape_to_string(bias.shape()));
  }
  const std::size_t batch = x.dim(0);
  const std::size_t in_features = x.dim(1);
  const std::size_t out_features = weight.dim(0);
  Tensor out = make_output(tape, {batch, out_features}, {&x, &weight, &bias});
  auto y = out.data_mut();
  auto b = bias.data();
  for (std::size_t n = 0; n < batch; ++n) std::copy(b.begin(), b.end(), y.begin() + n * out_features);
  kernels::linear_forward(batch, in_features, out_features, x.data(), weight.data(), y);
  out.check_finite("linear");
  if (out.requires_grad()) {
    tape.record(out, [x, weight, bias, out, batch, in_features, out_features]() {
      auto gy = out.grad();
      if (x.requires_grad()) {
        kernels::linear_backward_input(batch, in_features, out_features, gy, weight.data(), x.grad_mut());
      }
      if (weight.requires_grad()) {
        kernels::linear_backward_weight(batch, in_features, out_features, x.data(), gy, weight.grad_mut());
      }
      if (bias.requires_grad()) {
        auto gb = bias.grad_mut();
        for (std::size_t n = 0; n < batch; ++n) {
          for (std::size_t o = 0; o < out_features; ++o) gb[o] += gy[n * out_features + o];
        }
      }
    });
  }
  return out;
}

namespace {

void require_matrix(const Tensor& t, const char* op) {
  if (t.rank() != 2) throw ShapeError(std::string(op) + " expects [N,K], got " + shape_to_string(t.shape()));
}

std::vector<double> row_softmax(const Tensor& logits) {
  const std::size_t rows = logits.dim(0);
  const std::size_t cols = logits.dim(1);
  auto x = logits.data();
  std::vector<double> p(x.size());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* xr = x.data() + r * cols;
    double* pr = p.data() + r * cols;
    const double peak = *std::max_element(xr, xr + cols);
    double total = 0.0;
    for (std::size_t c = 0; c < cols; ++c) total += (pr[c] = std::exp(xr[c] - peak));
    for (std::size_t c = 0; c < cols; ++c) pr[c] /= total;
  }
  return p;
}

}  // namespace

Tensor softmax(Tape& tape, const Tensor& logits) {
  require_matrix(logits, "softmax");
  const std::size_t rows = logits.dim(0);
  const std::size_t cols = logits.dim(1);
  Tensor out = make_output(tape, logits.shape(), {&logits});
  std::vector<double> p = row_softmax(logits);
  std::copy(p.begin(), p.end(), out.data_mut().begin());
  if (out.requires_grad()) {
    tape.record(out, [logits, out, rows, cols]() {
      auto gy = out.grad();
      auto y = out.data();
      auto gx = logits.grad_mut();
      for (std::size_t r = 0; r < rows; ++r) {
        double dot = 0.0;
        for (std::size_t c = 0; c < cols; ++c) dot += gy[r * cols + c] * y[r * cols + c];
        for (std::size_t c = 0; c < cols; ++c) gx[r * cols + c] += y[r * cols + c] * (gy[r * cols + c] - dot);
      }
    });
  }
  return out;
}

Tensor log_softmax(Tape& tape, const Tensor& logits) {
  require_matrix(logits, "log_softmax");
  const std::size_t rows = logits.dim(0);
  const std::size_t cols = logits.dim(1);
  Tensor out = make_output(tape, logits.shape(), {&logits});
  auto x = logits.data();
  auto y = out.data_mut();
  for (std::size_t r = 0; r < rows; ++r) {
    const double* xr = x.data() + r * cols;
    const double peak = *std::max_element(xr, xr + cols);
    double total = 0.0;
    for (std::size_t c = 0; c < cols; ++c) total += std::exp(xr[c] - peak);
    const double log_norm = peak + std::log(total);
    for (std::size_t c = 0; c < cols; ++c) y[r * cols + c] = xr[c] - log_norm;
  }
  out.check_finite("log_softmax");
  if (out.requires_grad()) {
    tape.record(out, [logits, out, rows, cols]() {
      auto gy = out.grad();
      auto y = out.data();
      auto gx = logits.grad_mut();
      for (std::size_t r = 0; r < rows; ++r) {
        double total = 0.0;
        for (std::size_t c = 0; c < cols; ++c) total += gy[r * cols + c];
        for (std::size_t c = 0; c < cols; ++c) {
          gx[r * cols + c] += gy[r * cols + c] - std::exp(y[r * cols + c]) * total;
        }
      }
    });
  }
  return out;
}

Tensor cross_entropy(Tape& tape, const Tensor& logits, std::span<const std::size_t> labels) {
  require_matrix(logits, "cross_entropy");
  const std::size_t rows = logits.dim(0);
  const std::size_t cols = logits.dim(1);
  if (labels.size() != rows) throw ShapeError("cross_entropy: label count does not match batch");
  for (std::size_t label : labels) {
    if (label >= cols) throw InvalidArgument("cross_entropy: label " + std::to_string(label) + " out of range");
  }
  std::vector<double> p = row_softmax(logits);
  Tensor out = make_output(tape, {1}, {&logits});
  double loss = 0.0;
  auto x = logits.data();
  for (std::size_t r = 0; r < rows; ++r) {
    const double* xr = x.data() + r * cols;
    const double peak = *std::max_element(xr, xr + cols);
    double total = 0.0;
    for (std::size_t c = 0; c < cols; ++c) total += std::exp(xr[c] - peak);
    loss -= xr[labels[r]] - peak - std::log(total);
  }
  out.data_mut()[0] = loss / static_cast<double>(rows);
  out.check_finite("cross_entropy");
  if (out.requires_grad()) {
    std::vector<std::size_t> targets(labels.begin(), labels.end());
    tape.record(out, [logits, out, rows, cols, p = std::move(p), targets = std::move(targets)]() {
      const double gy = out.grad()[0] / static_cast<double>(rows);
      auto gx = logits.grad_mut();
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
          const double target = c == targets[r] ? 1.0 : 0.0;
          gx[r * cols + c] += gy * (p[r * cols + c] - target);
        }
      }
    });
  }
  return out;
}

}  // namespace cganseg
