#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "cganseg/rng.hpp"
#include "cganseg/tensor.hpp"

namespace cganseg {

/// Ordered record of the operations applied to gradient-tracking tensors.
///
/// Ops append an entry only when at least one input requires a gradient, so
/// entries are in topological order by construction. backward() walks them
/// once, newest first, and then releases them; a tape cannot be replayed.
/// In Inference mode nothing is recorded and no output requires a gradient.
class Tape {
 public:
  enum class Mode { Record, Inference };

  explicit Tape(Mode mode = Mode::Record) : mode_(mode) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool recording() const { return mode_ == Mode::Record && !consumed_; }
  bool consumed() const { return consumed_; }
  std::size_t size() const { return entries_.size(); }

  // Whether an op over `inputs` should produce a gradient-tracking output.
  bool tracks(std::initializer_list<const Tensor*> inputs) const;
  void record(const Tensor& output, std::function<void()> backward);

  // Seeds d(loss)/d(loss) = 1 and propagates into every reachable
  // requires_grad tensor, accumulating into existing gradient buffers.
  // Throws TapeError for a non-scalar loss, a loss not produced on this tape,
  // or a tape that was already consumed.
  void backward(const Tensor& loss);

 private:
  struct Entry {
    Tensor output;
    std::function<void()> backward;
  };
  Mode mode_;
  bool consumed_ = false;
  std::vector<Entry> entries_;
};

// Values of `t` without gradient tracking; gradients do not flow through.
Tensor detach(const Tensor& t);

// Stacks equally shaped tensors along a new leading axis (no gradient).
Tensor stack(std::span<const Tensor> items);

Tensor add(Tape& tape, const Tensor& a, const Tensor& b);
Tensor sub(Tape& tape, const Tensor& a, const Tensor& b);
Tensor mul(Tape& tape, const Tensor& a, const Tensor& b);
Tensor scale(Tape& tape, const Tensor& a, double factor);
Tensor add_scalar(Tape& tape, const Tensor& a, double offset);

Tensor relu(Tape& tape, const Tensor& a);
Tensor leaky_relu(Tape& tape, const Tensor& a, double slope);
Tensor tanh(Tape& tape, const Tensor& a);
Tensor sigmoid(Tape& tape, const Tensor& a);
Tensor abs(Tape& tape, const Tensor& a);
// log(max(a, floor)); the gradient is zero where the floor is active.
Tensor clamped_log(Tape& tape, const Tensor& a, double floor);

Tensor sum(Tape& tape, const Tensor& a);
Tensor mean(Tape& tape, const Tensor& a);

Tensor concat(Tape& tape, std::span<const Tensor> parts, std::size_t axis);
Tensor reshape(Tape& tape, const Tensor& a, Shape shape);

// Inverted dropout: in training mode each element is zeroed with
// probability p and survivors are scaled by 1/(1-p). Identity otherwise.
Tensor dropout(Tape& tape, const Tensor& a, double p, bool training, Rng& rng);

// input [N,C,H,W], kernel [F,C,kH,kW] -> [N,F,H',W'].
Tensor conv2d(Tape& tape, const Tensor& input, const Tensor& kernel, int stride, int padding);
// input [N,F,H,W], kernel [F,C,kH,kW] -> [N,C,(H-1)*stride-2*padding+kH, ...].
// The adjoint of conv2d with the same kernel.
Tensor conv2d_transpose(Tape& tape, const Tensor& input, const Tensor& kernel, int stride, int padding);
// a [N,C,...] plus bias [C] broadcast over every other axis.
Tensor add_channel_bias(Tape& tape, const Tensor& a, const Tensor& bias);
// x [N,I], weight [O,I], bias [O] -> [N,O].
Tensor linear(Tape& tape, const Tensor& x, const Tensor& weight, const Tensor& bias);

// Row-wise over [N,K].
Tensor softmax(Tape& tape, const Tensor& logits);
Tensor log_softmax(Tape& tape, const Tensor& logits);
// Mean negative log-likelihood of integer class labels under softmax(logits).
Tensor cross_entropy(Tape& tape, const Tensor& logits, std::span<const std::size_t> labels);

}  // namespace cganseg
