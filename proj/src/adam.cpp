#include "cganseg/adam.hpp"

#include <cmath>
#include <string>

#include "cganseg/errors.hpp"

namespace cganseg {

void AdamConfig::validate() const {
  if (!(lr > 0.0)) throw InvalidArgument("Adam learning rate must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw InvalidArgument("Adam betas must lie in [0, 1)");
  }
  if (!(eps > 0.0)) throw InvalidArgument("Adam eps must be positive");
}

Adam::Adam(std::vector<Tensor> params, AdamConfig config) : params_(std::move(params)), config_(config) {
  config_.validate();
  first_.reserve(params_.size());
  second_.reserve(params_.size());
  for (const Tensor& p : params_) {
    first_.emplace_back(p.numel(), 0.0);
    second_.emplace_back(p.numel(), 0.0);
  }
}

void Adam::step() {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (!params_[i].has_grad()) throw TapeError("adam_step: parameter " + std::to_string(i) + " has no gradient");
  }
  ++step_;
  const double t = static_cast<double>(step_);
  const double correction1 = 1.0 - std::pow(config_.beta1, t);
  const double correction2 = 1.0 - std::pow(config_.beta2, t);
  for (std::size_t i = 0; i < params_.size(); ++i) {
    auto values = params_[i].data_mut();
    auto grads = params_[i].grad();
    auto& m = first_[i];
    auto& v = second_[i];
    for (std::size_t j = 0; j < values.size(); ++j) {
      const double g = grads[j];
      m[j] = config_.beta1 * m[j] + (1.0 - config_.beta1) * g;
      v[j] = config_.beta2 * v[j] + (1.0 - config_.beta2) * g * g;
      const double m_hat = m[j] / correction1;
      const double v_hat = v[j] / correction2;
      values[j] -= config_.lr * m_hat / (std::sqrt(v_hat) + config_.eps);
    }
  }
}

void Adam::zero_grad() {
  for (Tensor& p : params_) p.zero_grad();
}

}  // namespace cganseg
