#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "cganseg/adam.hpp"
#include "cganseg/dataset.hpp"
#include "cganseg/losses.hpp"
#include "cganseg/metrics.hpp"
#include "cganseg/nets.hpp"
#include "cganseg/shape_analysis.hpp"

namespace cganseg {

struct TrainConfig {
  int epochs = 200;
  int batch_size = 4;
  double lr = 2e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double lambda_l1 = 100.0;
  double epsilon_log = 1e-12;
  std::uint64_t seed = 0;
  Variant variant = Variant::GenUnet;
  int resolution = 64;
  int depth = 4;
  int base_channels = 16;        // generator
  int disc_base_channels = 16;   // discriminator
  int checkpoint_every = 0;      // epochs; 0 disables periodic checkpoints
  double threshold = 0.5;        // for validation masks

  // epochs >= 1, batch_size >= 1, lr > 0, generator variant, valid specs.
  void validate() const;
  NetworkSpec generator_spec() const;
  NetworkSpec discriminator_spec() const;
  LossConfig loss_config() const { return {lambda_l1, epsilon_log}; }
};

struct EpochRecord {
  int epoch = 0;
  double g_loss = 0.0;  // batch mean
  double d_loss = 0.0;  // batch mean
  double val_dice = 0.0;
  double val_jaccard = 0.0;
  double seconds = 0.0;
};

struct TrainReport {
  std::vector<EpochRecord> epochs;
  // True when no validation split was given and the val_* columns were
  // measured on the training split instead.
  bool validated_on_train = false;
};

struct CganResult {
  Weights generator;
  Weights discriminator;
  Weights best_generator;  // highest validation Dice, earliest epoch on ties
  int best_epoch = 0;
  TrainReport report;
};

// The two halves of one adversarial mini-batch update. `fake` is the
// generator output for `images`, recorded on `g_tape`.
//
// discriminator_step scores real and detached fake masks on its own tape and
// updates only the discriminator. generator_step freezes the discriminator,
// scores `fake` on `g_tape`, backpropagates the generator loss into the generator and
// updates it. Both return the loss value.
double discriminator_step(Weights& discriminator, Adam& d_opt, const Tensor& images, const Tensor& masks,
                          const Tensor& fake, const LossConfig& cfg);
double generator_step(Tape& g_tape, Weights& discriminator, Adam& g_opt, const Tensor& images, const Tensor& masks,
                      const Tensor& fake, const LossConfig& cfg);

using CheckpointFn = std::function<void(int epoch, const Weights& generator, const Weights& discriminator)>;
using EpochFn = std::function<void(const EpochRecord&)>;

// Alternating optimization, per mini-batch:
//   1. discriminator step on the discriminator loss with the generated masks detached;
//   2. generator step on the generator loss with discriminator parameters frozen.
// Deterministic for a fixed cfg.seed. Throws NumericError naming the epoch
// and batch if a loss turns non-finite.
CganResult train_cgan(const std::vector<SamplePair>& train, const std::vector<SamplePair>& val,
                      const TrainConfig& cfg, const CheckpointFn& on_checkpoint = {},
                      const EpochFn& on_epoch = {});

// Generator probabilities for images [N,1,R,R] (or one [1,R,R] image). Dropout
// stays off unless `stochastic` supplies a random stream.
Tensor predict_probabilities(const Weights& generator, const Tensor& images, Rng* stochastic = nullptr);

// Generator forward then threshold: p >= threshold -> 1. threshold in (0,1).
// The result has the shape of `image`.
Tensor segment(const Weights& generator, const Tensor& image, double threshold = 0.5,
               Rng* stochastic = nullptr);

// Pooled metrics of segment() against each sample's mask.
SegMetrics evaluate_generator(const Weights& generator, const std::vector<SamplePair>& samples,
                              double threshold = 0.5);

struct ShapeTrainConfig {
  int batch_size = 16;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  std::uint64_t seed = 0;
  int resolution = 64;
  int base_channels = 8;

  void validate() const;
  NetworkSpec spec() const;
};

struct FoldResult {
  Weights weights;
  std::size_t test_count = 0;
  double accuracy = 0.0;
};

struct ShapeCvReport {
  std::vector<FoldResult> folds;
  double mean_accuracy = 0.0;  // unweighted mean of fold accuracies
  ClassMatrix confusion{};     // pooled over held-out predictions
};

// Fold index per item. Each class is shuffled and dealt round-robin, with the
// starting fold carried over between classes. Throws InvalidArgument when a
// class (in a multi-class set) has fewer members than folds, or when there
// are fewer items than folds.
std::vector<int> stratified_folds(const std::vector<ShapeLabel>& labels, int folds, std::uint64_t seed);

// Stratified k-fold cross-validation of the shape CNN trained with
// cross-entropy on the samples' masks.
ShapeCvReport train_shape_cnn(const std::vector<SamplePair>& samples, int folds, int epochs_per_fold,
                              const ShapeTrainConfig& cfg);

// One classifier trained on every sample (no held-out part).
Weights train_shape_classifier(const std::vector<SamplePair>& samples, int epochs, const ShapeTrainConfig& cfg,
                               std::uint64_t init_seed);

}  // namespace cganseg
