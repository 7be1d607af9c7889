#pragma once

#include "cganseg/autodiff.hpp"
#include "cganseg/tensor.hpp"

namespace cganseg {

struct LossConfig {
  double lambda_l1 = 100.0;    // weight of the reconstruction term
  double epsilon_log = 1e-12;  // floor inside every log

  // lambda_l1 >= 0 and 0 < epsilon_log <= 1e-6, else InvalidArgument.
  void validate() const;
};

// Generator objective, averaged over the batch:
//   mean_n[-log D(x_n, G(x_n))] + lambda * mean_pixels |y - G(x)|
// The reconstruction term is the per-pixel mean absolute difference.
// `d_score_on_fake` must come from the discriminator applied to the
// generator's output (not detached) for gradients to reach the generator.
Tensor generator_loss(Tape& tape, const Tensor& d_score_on_fake, const Tensor& fake_mask, const Tensor& true_mask,
                      const LossConfig& cfg);

// Discriminator objective, averaged over the batch:
//   mean_n[-log D(x_n, y_n)] + mean_n[-log(1 - D(x_n, G(x_n)))]
// Callers detach the generated mask before scoring it so the generator
// receives no gradient from this loss.
Tensor discriminator_loss(Tape& tape, const Tensor& d_score_on_real, const Tensor& d_score_on_fake,
                          const LossConfig& cfg);

}  // namespace cganseg
