#include <doctest.h>

#include <cmath>

#include "cganseg/errors.hpp"
#include "cganseg/losses.hpp"
#include "support.hpp"

using namespace cganseg;

namespace {

double gen_loss(std::vector<double> scores, const Tensor& fake, const Tensor& truth, LossConfig cfg = {}) {
  Tape tape(Tape::Mode::Inference);
  const std::size_t n = scores.size();
  return generator_loss(tape, Tensor({n}, std::move(scores)), fake, truth, cfg).item();
}

double disc_loss(std::vector<double> real, std::vector<double> fake) {
  Tape tape(Tape::Mode::Inference);
  const std::size_t n = real.size();
  return discriminator_loss(tape, Tensor({n}, std::move(real)), Tensor({n}, std::move(fake)), {}).item();
}

}  // namespace

TEST_CASE("generator loss examples") {
  Tensor truth({1, 1, 2, 2}, {1.0, 0.0, 1.0, 0.0});
  CHECK(gen_loss({1.0}, truth, truth) == 0.0);

  // mean |y - G| = 0.1 with score 0.5: -ln 0.5 + 100 * 0.1.
  Tensor fake({1, 1, 2, 2}, {0.9, 0.1, 0.9, 0.1});
  CHECK(std::fabs(gen_loss({0.5}, fake, truth) - (std::log(2.0) + 10.0)) < 1e-9);
  CHECK(std::fabs(gen_loss({0.5}, fake, truth) - 10.693147180559945) < 1e-9);

  LossConfig no_l1;
  no_l1.lambda_l1 = 0.0;
  CHECK(std::fabs(gen_loss({0.3}, fake, truth, no_l1) + std::log(0.3)) < 1e-12);
}

TEST_CASE("discriminator loss examples") {
  CHECK(std::fabs(disc_loss({0.5}, {0.5}) - 2.0 * std::log(2.0)) < 1e-12);
  CHECK(std::fabs(disc_loss({0.5}, {0.5}) - 1.38629436) < 1e-8);
  CHECK(disc_loss({1.0}, {0.0}) == 0.0);
  CHECK(std::fabs(disc_loss({0.9}, {0.2}) - (-std::log(0.9) - std::log(0.8))) < 1e-12);
  CHECK(std::fabs(disc_loss({0.9}, {0.2}) - 0.3285040669720361) < 1e-12);
  // Batch mean.
  CHECK(std::fabs(disc_loss({0.9, 0.5}, {0.2, 0.5}) - 0.5 * (0.3285040669720361 + 2.0 * std::log(2.0))) < 1e-12);
}

TEST_CASE("losses stay finite at saturated scores") {
  Tensor truth({1, 1, 1, 2}, {1.0, 0.0});
  const double g = gen_loss({0.0}, truth, truth);
  CHECK(std::isfinite(g));
  CHECK(std::fabs(g + std::log(1e-12)) < 1e-9);
  CHECK(std::isfinite(disc_loss({0.0}, {1.0})));
}

TEST_CASE("loss preconditions") {
  Tape tape(Tape::Mode::Inference);
  Tensor m({1, 1, 2, 2});
  CHECK_THROWS_AS(generator_loss(tape, Tensor({1}, std::vector<double>{1.5}), m, m, {}), InvalidArgument);
  CHECK_THROWS_AS(generator_loss(tape, Tensor({2}, {0.5, 0.5}), m, m, {}), ShapeError);
  CHECK_THROWS_AS(discriminator_loss(tape, Tensor({1}, std::vector<double>{0.5}), Tensor({2}, {0.5, 0.5}), {}), ShapeError);
  LossConfig bad;
  bad.lambda_l1 = -1.0;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  bad = {};
  bad.epsilon_log = 0.0;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
}

TEST_CASE("generator loss is monotone in score and distance") {
  Rng rng(3);
  Tensor truth = testing::random_mask(rng, {2, 1, 4, 4});
  for (int trial = 0; trial < 100; ++trial) {
    Tensor fake = testing::random_tensor(rng, {2, 1, 4, 4}, 0.0, 1.0);
    const double s = rng.uniform(0.05, 0.9);
    CHECK(gen_loss({s + 0.05, s + 0.05}, fake, truth) < gen_loss({s, s}, fake, truth));
    // Pull the prediction halfway toward the truth: the distance drops.
    Tensor closer(fake.shape());
    for (std::size_t i = 0; i < fake.numel(); ++i) closer.data_mut()[i] = 0.5 * (fake.at(i) + truth.at(i));
    CHECK(gen_loss({s, s}, closer, truth) < gen_loss({s, s}, fake, truth));
  }
}

TEST_CASE("loss gradients pass finite-difference checks") {
  Rng rng(4);
  Tensor truth = testing::random_mask(rng, {2, 1, 3, 3});
  Tensor fake = testing::random_tensor(rng, {2, 1, 3, 3}, 0.05, 0.95, true);
  // Keep |y - G| well away from zero so the absolute value is smooth.
  for (std::size_t i = 0; i < fake.numel(); ++i) {
    if (std::fabs(fake.at(i) - truth.at(i)) < 0.05) fake.data_mut()[i] = 0.5;
  }
  Tensor score = testing::random_tensor(rng, {2}, 0.1, 0.9, true);
  Tensor real = testing::random_tensor(rng, {2}, 0.1, 0.9, true);
  const auto g = testing::check_gradients(
      {score, fake}, [&](Tape& t) { return generator_loss(t, score, fake, truth, {}); });
  CHECK(g.max_relative_error < 1e-4);
  const auto d =
      testing::check_gradients({real, score}, [&](Tape& t) { return discriminator_loss(t, real, score, {}); });
  CHECK(d.max_relative_error < 1e-4);
}
