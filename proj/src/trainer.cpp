#include "cganseg/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <numeric>
#include <string>

#include "cganseg/adam.hpp"
#include "cganseg/autodiff.hpp"
#include "cganseg/errors.hpp"

namespace cganseg {

void TrainConfig::validate() const {
  if (epochs < 1) throw InvalidArgument("epochs must be >= 1");
  if (batch_size < 1) throw InvalidArgument("batch_size must be >= 1");
  if (!(lr > 0.0)) throw InvalidArgument("learning rate must be positive");
  if (!is_generator(variant)) throw InvalidArgument("training variant must be a generator (unet or autoenc)");
  if (checkpoint_every < 0) throw InvalidArgument("checkpoint_every must be >= 0");
  if (!(threshold > 0.0 && threshold < 1.0)) throw InvalidArgument("threshold must lie in (0,1)");
  AdamConfig{lr, beta1, beta2}.validate();
  loss_config().validate();
  generator_spec().validate();
  discriminator_spec().validate();
}

NetworkSpec TrainConfig::generator_spec() const { return {variant, resolution, depth, base_channels}; }

NetworkSpec TrainConfig::discriminator_spec() const {
  return {Variant::Discriminator, resolution, depth, disc_base_channels};
}

namespace {

struct Batch {
  Tensor images;
  Tensor masks;
};

Batch make_batch(const std::vector<SamplePair>& samples, std::span<const std::size_t> indices) {
  std::vector<Tensor> images, masks;
  for (std::size_t i : indices) {
    images.push_back(samples[i].image);
    masks.push_back(samples[i].mask);
  }
  return {stack(images), stack(masks)};
}

void require_resolution(const std::vector<SamplePair>& samples, int resolution, const char* which) {
  for (const SamplePair& s : samples) {
    s.validate();
    if (s.resolution() != static_cast<std::size_t>(resolution)) {
      throw ShapeError(std::string(which) + " sample " + s.id + " has resolution " +
                       std::to_string(s.resolution()) + ", expected " + std::to_string(resolution));
    }
  }
}

Tensor as_batch(const Tensor& images) {
  if (images.rank() == 3) return images.reshaped({1, images.dim(0), images.dim(1), images.dim(2)});
  return images;
}

}  // namespace

Tensor predict_probabilities(const Weights& generator, const Tensor& images, Rng* stochastic) {
  Tape tape(Tape::Mode::Inference);
  Rng unused(0);
  Tensor batch = as_batch(images);
  return generator_forward(tape, generator, batch, stochastic != nullptr, stochastic ? *stochastic : unused);
}

Tensor segment(const Weights& generator, const Tensor& image, double threshold, Rng* stochastic) {
  if (!(threshold > 0.0 && threshold < 1.0)) throw InvalidArgument("segmentation threshold must lie in (0,1)");
  Tensor probs = predict_probabilities(generator, image, stochastic);
  std::vector<double> mask(probs.numel());
  auto p = probs.data();
  for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = p[i] >= threshold ? 1.0 : 0.0;
  return Tensor(image.shape(), std::move(mask));
}

SegMetrics evaluate_generator(const Weights& generator, const std::vector<SamplePair>& samples, double threshold) {
  if (samples.empty()) throw InvalidArgument("evaluate_generator() needs samples");
  ConfusionCounts pooled;
  for (const SamplePair& s : samples) pooled += confusion(segment(generator, s.image, threshold), s.mask);
  return metrics(pooled);
}

double discriminator_step(Weights& discriminator, Adam& d_opt, const Tensor& images, const Tensor& masks,
                          const Tensor& fake, const LossConfig& cfg) {
  d_opt.zero_grad();
  Tape tape;
  Tensor real_score = discriminator_forward(tape, discriminator, images, masks);
  Tensor fake_score = discriminator_forward(tape, discriminator, images, detach(fake));
  Tensor loss = discriminator_loss(tape, real_score, fake_score, cfg);
  tape.backward(loss);
  d_opt.step();
  return loss.item();
}

double generator_step(Tape& g_tape, Weights& discriminator, Adam& g_opt, const Tensor& images, const Tensor& masks,
                      const Tensor& fake, const LossConfig& cfg) {
  g_opt.zero_grad();
  discriminator.set_trainable(false);
  try {
    Tensor score = discriminator_forward(g_tape, discriminator, images, fake);
    Tensor loss = generator_loss(g_tape, score, fake, masks, cfg);
    g_tape.backward(loss);
    discriminator.set_trainable(true);
    g_opt.step();
    return loss.item();
  } catch (...) {
    discriminator.set_trainable(true);
    throw;
  }
}

CganResult train_cgan(const std::vector<SamplePair>& train, const std::vector<SamplePair>& val,
                      const TrainConfig& cfg, const CheckpointFn& on_checkpoint, const EpochFn& on_epoch) {
  cfg.validate();
  if (train.empty()) throw InvalidArgument("training set is empty");
  require_resolution(train, cfg.resolution, "training");
  require_resolution(val, cfg.resolution, "validation");

  Weights generator = build(cfg.generator_spec(), derive_seed(cfg.seed, 1));
  Weights discriminator = build(cfg.discriminator_spec(), derive_seed(cfg.seed, 2));
  Adam g_opt(generator.tensors(), {cfg.lr, cfg.beta1, cfg.beta2});
  Adam d_opt(discriminator.tensors(), {cfg.lr, cfg.beta1, cfg.beta2});
  Rng order_rng(derive_seed(cfg.seed, 3));
  Rng dropout_rng(derive_seed(cfg.seed, 4));
  const LossConfig loss_cfg = cfg.loss_config();

  const std::vector<SamplePair>& monitor = val.empty() ? train : val;
  CganResult result;
  result.report.validated_on_train = val.empty();
  double best_dice = -1.0;

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t batch_size = static_cast<std::size_t>(cfg.batch_size);

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto started = std::chrono::steady_clock::now();
    order_rng.shuffle(order);
    double g_total = 0.0;
    double d_total = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
      const std::size_t count = std::min(batch_size, order.size() - start);
      const Batch batch = make_batch(train, std::span(order).subspan(start, count));
      try {
        Tape g_tape;
        Tensor fake = generator_forward(g_tape, generator, batch.images, true, dropout_rng);
        d_total += discriminator_step(discriminator, d_opt, batch.images, batch.masks, fake, loss_cfg);
        g_total += generator_step(g_tape, discriminator, g_opt, batch.images, batch.masks, fake, loss_cfg);
      } catch (const NumericError& e) {
        throw NumericError("training diverged at epoch " + std::to_string(epoch) + ", batch " +
                           std::to_string(batches + 1) + ": " + e.what());
      }
      for (const Tensor& p : generator.tensors()) p.check_finite("generator update");
      for (const Tensor& p : discriminator.tensors()) p.check_finite("discriminator update");
      ++batches;
    }

    EpochRecord record;
    record.epoch = epoch;
    record.g_loss = g_total / static_cast<double>(batches);
    record.d_loss = d_total / static_cast<double>(batches);
    const SegMetrics m = evaluate_generator(generator, monitor, cfg.threshold);
    record.val_dice = m.dice;
    record.val_jaccard = m.jaccard;
    record.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    result.report.epochs.push_back(record);
    if (record.val_dice > best_dice) {
      best_dice = record.val_dice;
      result.best_epoch = epoch;
      result.best_generator = generator.clone();
    }
    if (on_epoch) on_epoch(record);
    if (on_checkpoint && cfg.checkpoint_every > 0 && epoch % cfg.checkpoint_every == 0) {
      on_checkpoint(epoch, generator, discriminator);
    }
  }
  result.generator = std::move(generator);
  result.discriminator = std::move(discriminator);
  return result;
}

void ShapeTrainConfig::validate() const {
  if (batch_size < 1) throw InvalidArgument("batch_size must be >= 1");
  AdamConfig{lr, beta1, beta2}.validate();
  spec().validate();
}

NetworkSpec ShapeTrainConfig::spec() const { return {Variant::ShapeCNN, resolution, 2, base_channels}; }

std::vector<int> stratified_folds(const std::vector<ShapeLabel>& labels, int folds, std::uint64_t seed) {
  if (folds < 2) throw InvalidArgument("cross-validation needs at least 2 folds");
  const std::size_t k = static_cast<std::size_t>(folds);
  if (labels.size() < k) {
    throw InvalidArgument(std::to_string(labels.size()) + " samples cannot fill " + std::to_string(folds) + " folds");
  }
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[code(labels[i])].push_back(i);
  if (by_class.size() > 1) {
    for (const auto& [c, members] : by_class) {
      if (members.size() < k) {
        throw InvalidArgument("class " + std::string(shape_name(shape_from_code(c))) + " has " +
                              std::to_string(members.size()) + " samples, fewer than " + std::to_string(folds) +
                              " folds; stratification impossible");
      }
    }
  }
  Rng rng(seed);
  std::vector<int> fold(labels.size(), 0);
  std::size_t next = 0;
  for (auto& [c, members] : by_class) {
    rng.shuffle(members);
    for (std::size_t j = 0; j < members.size(); ++j) fold[members[j]] = static_cast<int>((next + j) % k);
    next = (next + members.size()) % k;
  }
  return fold;
}

namespace {

std::vector<std::size_t> label_codes(const std::vector<SamplePair>& samples) {
  std::vector<std::size_t> codes;
  for (const SamplePair& s : samples) {
    if (!s.shape_label) throw InvalidArgument("sample " + s.id + " has no shape label");
    codes.push_back(static_cast<std::size_t>(code(*s.shape_label)));
  }
  return codes;
}

Weights fit_classifier(const std::vector<SamplePair>& samples, const std::vector<std::size_t>& codes,
                       std::vector<std::size_t> train_idx, int epochs, const ShapeTrainConfig& cfg,
                       std::uint64_t init_seed, std::uint64_t order_seed) {
  Weights weights = build(cfg.spec(), init_seed);
  Adam opt(weights.tensors(), {cfg.lr, cfg.beta1, cfg.beta2});
  Rng order_rng(order_seed);
  const std::size_t batch_size = static_cast<std::size_t>(cfg.batch_size);
  for (int epoch = 0; epoch < epochs; ++epoch) {
    order_rng.shuffle(train_idx);
    for (std::size_t start = 0; start < train_idx.size(); start += batch_size) {
      const std::size_t count = std::min(batch_size, train_idx.size() - start);
      std::vector<Tensor> masks;
      std::vector<std::size_t> targets;
      for (std::size_t j = start; j < start + count; ++j) {
        masks.push_back(samples[train_idx[j]].mask);
        targets.push_back(codes[train_idx[j]]);
      }
      opt.zero_grad();
      Tape tape;
      Tensor loss = cross_entropy(tape, shape_cnn_logits(tape, weights, stack(masks)), targets);
      tape.backward(loss);
      opt.step();
    }
  }
  return weights;
}

}  // namespace

ShapeCvReport train_shape_cnn(const std::vector<SamplePair>& samples, int folds, int epochs_per_fold,
                              const ShapeTrainConfig& cfg) {
  cfg.validate();
  if (epochs_per_fold < 1) throw InvalidArgument("epochs_per_fold must be >= 1");
  require_resolution(samples, cfg.resolution, "shape");
  const std::vector<std::size_t> codes = label_codes(samples);
  std::vector<ShapeLabel> labels;
  for (std::size_t c : codes) labels.push_back(shape_from_code(static_cast<int>(c)));
  const std::vector<int> fold_of = stratified_folds(labels, folds, derive_seed(cfg.seed, 10));

  ShapeCvReport report;
  for (int f = 0; f < folds; ++f) {
    std::vector<std::size_t> train_idx, test_idx;
    for (std::size_t i = 0; i < samples.size(); ++i) (fold_of[i] == f ? test_idx : train_idx).push_back(i);
    const auto tag = static_cast<std::uint64_t>(f);
    Weights weights = fit_classifier(samples, codes, train_idx, epochs_per_fold, cfg,
                                     derive_seed(cfg.seed, 100 + tag), derive_seed(cfg.seed, 200 + tag));
    std::vector<Tensor> masks;
    std::vector<ShapeLabel> truth;
    for (std::size_t i : test_idx) {
      masks.push_back(samples[i].mask);
      truth.push_back(labels[i]);
    }
    const std::vector<ShapeLabel> predicted = classify_shapes(weights, masks);
    const ShapeAccuracy acc = shape_accuracy(predicted, truth);
    for (std::size_t r = 0; r < 4; ++r) {
      for (std::size_t c = 0; c < 4; ++c) report.confusion[r][c] += acc.confusion[r][c];
    }
    report.folds.push_back({std::move(weights), test_idx.size(), acc.accuracy});
  }
  double total = 0.0;
  for (const FoldResult& f : report.folds) total += f.accuracy;
  report.mean_accuracy = total / static_cast<double>(report.folds.size());
  return report;
}

Weights train_shape_classifier(const std::vector<SamplePair>& samples, int epochs, const ShapeTrainConfig& cfg,
                               std::uint64_t init_seed) {
  cfg.validate();
  if (epochs < 1) throw InvalidArgument("epochs must be >= 1");
  if (samples.empty()) throw InvalidArgument("no samples to train on");
  require_resolution(samples, cfg.resolution, "shape");
  const std::vector<std::size_t> codes = label_codes(samples);
  std::vector<std::size_t> all(samples.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return fit_classifier(samples, codes, std::move(all), epochs, cfg, init_seed, derive_seed(init_seed, 1));
}

}  // namespace cganseg
