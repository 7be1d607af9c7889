#pragma once

#include <cstddef>
#include <vector>

#include "cganseg/tensor.hpp"

namespace cganseg {

struct AdamConfig {
  double lr = 2e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double eps = 1e-8;

  void validate() const;
};

/// Adaptive-moment optimizer with bias-corrected moments:
///   m <- b1 m + (1-b1) g,  v <- b2 v + (1-b2) g^2
///   p <- p - lr * (m / (1-b1^t)) / (sqrt(v / (1-b2^t)) + eps)
/// Moment state belongs to the parameter at the same position in the list
/// given at construction and persists across step() calls.
class Adam {
 public:
  Adam(std::vector<Tensor> params, AdamConfig config);

  // Throws TapeError if any parameter has no gradient buffer.
  void step();
  void zero_grad();

  std::size_t steps_taken() const { return step_; }
  const AdamConfig& config() const { return config_; }
  const std::vector<double>& first_moment(std::size_t param) const { return first_[param]; }
  const std::vector<double>& second_moment(std::size_t param) const { return second_[param]; }

 private:
  std::vector<Tensor> params_;
  AdamConfig config_;
  std::vector<std::vector<double>> first_;
  std::vector<std::vector<double>> second_;
  std::size_t step_ = 0;
};

}  // namespace cganseg
