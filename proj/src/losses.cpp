#include "cganseg/losses.hpp"

#include "cganseg/errors.hpp"

namespace cganseg {

void LossConfig::validate() const {
  if (!(lambda_l1 >= 0.0)) throw InvalidArgument("lambda_l1 must be >= 0");
  if (!(epsilon_log > 0.0 && epsilon_log <= 1e-6)) throw InvalidArgument("epsilon_log must lie in (0, 1e-6]");
}

namespace {

void require_scores(const Tensor& scores, const char* what) {
  if (scores.rank() != 1) throw ShapeError(std::string(what) + " must be a [N] score vector");
  for (double s : scores.data()) {
    if (!(s >= 0.0 && s <= 1.0)) throw InvalidArgument(std::string(what) + " outside [0,1]");
  }
}

Tensor mean_neg_log(Tape& tape, const Tensor& t, double eps) {
  return scale(tape, mean(tape, clamped_log(tape, t, eps)), -1.0);
}

}  // namespace

Tensor generator_loss(Tape& tape, const Tensor& d_score_on_fake, const Tensor& fake_mask, const Tensor& true_mask,
                      const LossConfig& cfg) {
  cfg.validate();
  require_scores(d_score_on_fake, "discriminator score");
  if (fake_mask.shape() != true_mask.shape()) {
    throw ShapeError("generated mask " + shape_to_string(fake_mask.shape()) + " and ground truth " +
                     shape_to_string(true_mask.shape()) + " differ in shape");
  }
  if (fake_mask.dim(0) != d_score_on_fake.dim(0)) throw ShapeError("score count does not match mask batch");
  Tensor adversarial = mean_neg_log(tape, d_score_on_fake, cfg.epsilon_log);
  Tensor l1 = mean(tape, abs(tape, sub(tape, true_mask, fake_mask)));
  return add(tape, adversarial, scale(tape, l1, cfg.lambda_l1));
}

Tensor discriminator_loss(Tape& tape, const Tensor& d_score_on_real, const Tensor& d_score_on_fake,
                          const LossConfig& cfg) {
  cfg.validate();
  require_scores(d_score_on_real, "real score");
  require_scores(d_score_on_fake, "fake score");
  if (d_score_on_real.shape() != d_score_on_fake.shape()) throw ShapeError("real and fake score counts differ");
  Tensor real_term = mean_neg_log(tape, d_score_on_real, cfg.epsilon_log);
  Tensor one_minus_fake = add_scalar(tape, scale(tape, d_score_on_fake, -1.0), 1.0);
  Tensor fake_term = mean_neg_log(tape, one_minus_fake, cfg.epsilon_log);
  return add(tape, real_term, fake_term);
}

}  // namespace cganseg
