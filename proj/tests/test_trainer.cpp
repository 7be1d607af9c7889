#include <doctest.h>

#include <algorithm>
#include <map>

#include "cganseg/errors.hpp"
#include "cganseg/trainer.hpp"
#include "support.hpp"

using namespace cganseg;

namespace {

TrainConfig tiny_config() {
  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.batch_size = 3;
  cfg.resolution = 16;
  cfg.depth = 2;
  cfg.base_channels = 4;
  cfg.disc_base_channels = 4;
  cfg.seed = 5;
  return cfg;
}

}  // namespace

TEST_CASE("train config invariants") {
  TrainConfig cfg = tiny_config();
  CHECK_NOTHROW(cfg.validate());
  cfg.epochs = 0;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
  cfg = tiny_config();
  cfg.batch_size = 0;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
  cfg = tiny_config();
  cfg.lr = 0.0;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
  cfg = tiny_config();
  cfg.variant = Variant::Discriminator;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);

  const auto data = synth_generate(4, 1, 16);
  CHECK_THROWS_AS(train_cgan({}, {}, tiny_config()), InvalidArgument);
  TrainConfig wrong = tiny_config();
  wrong.resolution = 32;
  CHECK_THROWS_AS(train_cgan(data, {}, wrong), ShapeError);
}

TEST_CASE("training is deterministic and reports every epoch") {
  const auto data = synth_generate(5, 3, 16);
  const auto val = synth_generate(2, 4, 16);
  TrainConfig cfg = tiny_config();
  cfg.epochs = 3;
  cfg.checkpoint_every = 2;
  std::vector<int> checkpoints;
  std::vector<int> seen;
  CganResult a = train_cgan(
      data, val, cfg, [&](int epoch, const Weights&, const Weights&) { checkpoints.push_back(epoch); },
      [&](const EpochRecord& r) { seen.push_back(r.epoch); });
  CganResult b = train_cgan(data, val, cfg);
  CHECK(a.generator.bit_identical(b.generator));
  CHECK(a.discriminator.bit_identical(b.discriminator));
  CHECK(a.best_generator.bit_identical(b.best_generator));
  CHECK(checkpoints == std::vector<int>{2});
  CHECK(seen == std::vector<int>{1, 2, 3});
  REQUIRE(a.report.epochs.size() == 3);
  CHECK_FALSE(a.report.validated_on_train);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(a.report.epochs[i].g_loss == b.report.epochs[i].g_loss);
    CHECK(a.report.epochs[i].d_loss == b.report.epochs[i].d_loss);
  }
  CHECK(a.best_epoch >= 1);

  TrainConfig other = cfg;
  other.seed = 6;
  CHECK_FALSE(train_cgan(data, val, other).generator.bit_identical(a.generator));
  CHECK(train_cgan(data, {}, cfg).report.validated_on_train);
}

TEST_CASE("each half-step only moves its own network") {
  const auto data = synth_generate(2, 9, 16);
  const TrainConfig cfg = tiny_config();
  Weights g = build(cfg.generator_spec(), 1);
  Weights d = build(cfg.discriminator_spec(), 2);
  Adam g_opt(g.tensors(), {});
  Adam d_opt(d.tensors(), {});
  const Tensor images[] = {data[0].image, data[1].image};
  const Tensor masks[] = {data[0].mask, data[1].mask};
  Tensor x = stack(images), y = stack(masks);
  Rng rng(3);
  for (int step = 0; step < 3; ++step) {
    Tape g_tape;
    Tensor fake = generator_forward(g_tape, g, x, true, rng);
    const Weights g_before = g.clone();
    const Weights d_before = d.clone();
    discriminator_step(d, d_opt, x, y, fake, cfg.loss_config());
    CHECK(g.bit_identical(g_before));
    CHECK_FALSE(d.bit_identical(d_before));
    const Weights d_after = d.clone();
    generator_step(g_tape, d, g_opt, x, y, fake, cfg.loss_config());
    CHECK(d.bit_identical(d_after));
    CHECK_FALSE(g.bit_identical(g_before));
    for (const Tensor& p : d.tensors()) CHECK(p.requires_grad());
  }
}

TEST_CASE("segment output") {
  Weights g = build({Variant::GenUnet, 16, 2, 4}, 2);
  const auto data = synth_generate(1, 2, 16);
  Tensor m = segment(g, data[0].image, 0.5);
  CHECK(m.shape() == data[0].image.shape());
  for (double v : m.data()) CHECK((v == 0.0 || v == 1.0));
  CHECK_THROWS_AS(segment(g, data[0].image, 0.0), InvalidArgument);
  CHECK_THROWS_AS(segment(g, data[0].image, 1.0), InvalidArgument);
  CHECK_THROWS_AS(segment(g, Tensor({1, 10, 10}), 0.5), ShapeError);
}

TEST_CASE("stratified folds") {
  std::vector<ShapeLabel> labels;
  for (int i = 0; i < 40; ++i) labels.push_back(shape_from_code(i % 4));
  const auto folds = stratified_folds(labels, 2, 7);
  std::map<std::pair<int, int>, int> per;
  for (std::size_t i = 0; i < labels.size(); ++i) ++per[{folds[i], code(labels[i])}];
  for (int f = 0; f < 2; ++f) {
    for (int c = 0; c < 4; ++c) CHECK(per[{f, c}] == 5);
  }

  // Uneven classes: within +-1 per class per fold, and a partition.
  Rng rng(2);
  std::vector<ShapeLabel> uneven;
  for (int i = 0; i < 103; ++i) uneven.push_back(shape_from_code(static_cast<int>(rng.index(4))));
  for (int c = 0; c < 4; ++c) {
    for (int k = 0; k < 10; ++k) uneven.push_back(shape_from_code(c));
  }
  const auto f10 = stratified_folds(uneven, 10, 3);
  CHECK(f10.size() == uneven.size());
  for (int c = 0; c < 4; ++c) {
    std::vector<int> count(10, 0);
    for (std::size_t i = 0; i < uneven.size(); ++i) {
      if (code(uneven[i]) == c) ++count[static_cast<std::size_t>(f10[i])];
    }
    const auto [lo, hi] = std::minmax_element(count.begin(), count.end());
    CHECK(*hi - *lo <= 1);
  }
  std::vector<int> sizes(10, 0);
  for (int f : f10) ++sizes[static_cast<std::size_t>(f)];
  const auto [lo, hi] = std::minmax_element(sizes.begin(), sizes.end());
  CHECK(*hi - *lo <= 1);

  const std::vector<ShapeLabel> single(9, ShapeLabel::Oval);
  const auto plain = stratified_folds(single, 3, 1);
  std::vector<int> plain_sizes(3, 0);
  for (int f : plain) ++plain_sizes[static_cast<std::size_t>(f)];
  CHECK(plain_sizes == std::vector<int>{3, 3, 3});

  std::vector<ShapeLabel> sparse(20, ShapeLabel::Round);
  sparse.push_back(ShapeLabel::Oval);
  CHECK_THROWS_AS(stratified_folds(sparse, 2, 1), InvalidArgument);
  CHECK_THROWS_AS(stratified_folds(labels, 1, 1), InvalidArgument);
}

TEST_CASE("shape cross-validation runs end to end") {
  const auto samples = synth_generate(16, 4, 16);
  ShapeTrainConfig cfg;
  cfg.resolution = 16;
  cfg.base_channels = 4;
  cfg.batch_size = 4;
  cfg.seed = 2;
  const ShapeCvReport report = train_shape_cnn(samples, 2, 2, cfg);
  REQUIRE(report.folds.size() == 2);
  std::uint64_t pooled = 0;
  for (const auto& row : report.confusion) {
    for (std::uint64_t v : row) pooled += v;
  }
  CHECK(pooled == 16);
  CHECK(report.folds[0].test_count + report.folds[1].test_count == 16);
  CHECK(report.mean_accuracy == doctest::Approx((report.folds[0].accuracy + report.folds[1].accuracy) / 2));
  const ShapeCvReport again = train_shape_cnn(samples, 2, 2, cfg);
  CHECK(again.folds[1].weights.bit_identical(report.folds[1].weights));
  CHECK_THROWS_AS(train_shape_cnn(samples, 2, 0, cfg), InvalidArgument);
}
