// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "cganseg/autodiff.hpp"
#include "cganseg/dataset.hpp"
#include "cganseg/losses.hpp"
#include "cganseg/metrics.hpp"
#include "cganseg/nets.hpp"
#include "cganseg/shape_analysis.hpp"
#include "cganseg/trainer.hpp"
#include "cli.hpp"
#include "reference/reference.hpp"
#include "support.hpp"

using namespace cganseg;
using namespace cganseg::testing;
namespace fs = std::filesystem;

namespace {

// Tolerances and budgets.
constexpr double kGradStep = 1e-5;
constexpr double kGradTolerance = 1e-4;
constexpr double kGradSeconds = 60.0;
constexpr double kLossTolerance = 1e-9;
constexpr int kMetricPairs = 1000;
constexpr double kDiceJaccardTolerance = 1e-12;
constexpr int kMorphologyMasks = 100;

constexpr int kOverfitSamples = 8;
constexpr std::uint64_t kOverfitDataSeed = 42;
constexpr std::uint64_t kOverfitTrainSeed = 1;
constexpr int kOverfitResolution = 64;
constexpr int kOverfitEpochs = 200;
constexpr int kOverfitBatch = 2;
constexpr double kUnetDice = 0.95;
constexpr double kAutoEncDice = 0.90;

constexpr int kShapeSamples = 400;
constexpr std::uint64_t kShapeDataSeed = 7;
constexpr int kShapeResolution = 64;
constexpr int kShapeFolds = 10;
constexpr int kShapeEpochs = 50;
constexpr double kShapeAccuracy = 0.90;

int failures = 0;

void report(int id, bool pass, const std::string& detail) {
  std::printf("criterion %d: %s - %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* pattern, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, pattern, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

Tensor contract(Tape& t, const Tensor& y, const Tensor& w) { return sum(t, mul(t, y, w)); }

Weights spread_weights(const NetworkSpec& spec, std::uint64_t seed) {
  Weights w = build(spec, seed);
  Rng rng(seed + 1);
  for (Tensor t : w.tensors()) {
    for (double& v : t.data_mut()) v = rng.normal(0.0, 0.5);
  }
  return w;
}

int cli_run(std::vector<std::string> args) {
  args.insert(args.begin(), "cganseg");
  return cli::run(args);
}

void criterion_gradients() {
  const auto start = std::chrono::steady_clock::now();
  using Fn = std::function<Tensor(Tape&)>;
  std::vector<std::tuple<std::string, std::vector<Tensor>, Fn>> cases;

  Rng rng(2024);
  const Shape s{2, 3, 4};
  Tensor a = random_away_from_zero(rng, s, 0.1, true);
  Tensor b = random_away_from_zero(rng, s, 0.1, true);
  Tensor w = random_tensor(rng, s);
  Tensor positive = random_tensor(rng, s, 0.2, 2.0, true);
  cases.emplace_back("add", std::vector{a, b}, [&](Tape& t) { return contract(t, add(t, a, b), w); });
  cases.emplace_back("sub", std::vector{a, b}, [&](Tape& t) { return contract(t, sub(t, a, b), w); });
  cases.emplace_back("mul", std::vector{a, b}, [&](Tape& t) { return contract(t, mul(t, a, b), w); });
  cases.emplace_back("scale", std::vector{a}, [&](Tape& t) { return contract(t, scale(t, a, -1.7), w); });
  cases.emplace_back("add_scalar", std::vector{a},
                     [&](Tape& t) { return contract(t, mul(t, add_scalar(t, a, 0.3), a), w); });
  cases.emplace_back("relu", std::vector{a}, [&](Tape& t) { return contract(t, relu(t, a), w); });
  cases.emplace_back("leaky_relu", std::vector{a}, [&](Tape& t) { return contract(t, leaky_relu(t, a, 0.2), w); });
  cases.emplace_back("tanh", std::vector{a}, [&](Tape& t) { return contract(t, tanh(t, a), w); });
  cases.emplace_back("sigmoid", std::vector{a}, [&](Tape& t) { return contract(t, sigmoid(t, a), w); });
  cases.emplace_back("abs", std::vector{a}, [&](Tape& t) { return contract(t, abs(t, a), w); });
  cases.emplace_back("clamped_log", std::vector{positive},
                     [&](Tape& t) { return contract(t, clamped_log(t, positive, 1e-12), w); });
  cases.emplace_back("mean", std::vector{a}, [&](Tape& t) { return mean(t, mul(t, a, w)); });
  cases.emplace_back("reshape", std::vector{a},
                     [&](Tape& t) { return contract(t, reshape(t, a, {6, 4}), reshape(t, w, {6, 4})); });
  cases.emplace_back("concat", std::vector{a, b}, [&](Tape& t) {
    const Tensor parts[] = {a, b};
    const Tensor weights[] = {w, scale(t, w, 0.5)};
    return contract(t, concat(t, parts, 1), concat(t, weights, 1));
  });
  cases.emplace_back("dropout", std::vector{a}, [&](Tape& t) {
    Rng fixed(77);
    return contract(t, dropout(t, a, 0.5, true, fixed), w);
  });

  Tensor x = random_tensor(rng, {2, 2, 5, 5}, -1.0, 1.0, true);
  Tensor k = random_tensor(rng, {3, 2, 3, 3}, -1.0, 1.0, true);
  Tensor wc = random_tensor(rng, {2, 3, 3, 3});
  cases.emplace_back("conv2d", std::vector{x, k}, [&](Tape& t) { return contract(t, conv2d(t, x, k, 2, 1), wc); });
  Tensor in = random_tensor(rng, {2, 3, 3, 3}, -1.0, 1.0, true);
  Tensor kt = random_tensor(rng, {3, 2, 4, 4}, -1.0, 1.0, true);
  Tensor wt = random_tensor(rng, {2, 2, 6, 6});
  cases.emplace_back("conv2d_transpose", std::vector{in, kt},
                     [&](Tape& t) { return contract(t, conv2d_transpose(t, in, kt, 2, 1), wt); });
  Tensor bias = random_tensor(rng, {2}, -1.0, 1.0, true);
  Tensor wb = random_tensor(rng, x.shape());
  cases.emplace_back("add_channel_bias", std::vector{x, bias},
                     [&](Tape& t) { return contract(t, add_channel_bias(t, x, bias), wb); });
  Tensor lin_in = random_tensor(rng, {3, 5}, -1.0, 1.0, true);
  Tensor lin_w = random_tensor(rng, {4, 5}, -1.0, 1.0, true);
  Tensor lin_b = random_tensor(rng, {4}, -1.0, 1.0, true);
  Tensor wl = random_tensor(rng, {3, 4});
  cases.emplace_back("linear", std::vector{lin_in, lin_w, lin_b},
                     [&](Tape& t) { return contract(t, linear(t, lin_in, lin_w, lin_b), wl); });
  Tensor logits = random_tensor(rng, {3, 4}, -2.0, 2.0, true);
  static const std::size_t labels[] = {0, 3, 2};
  cases.emplace_back("softmax", std::vector{logits}, [&](Tape& t) { return contract(t, softmax(t, logits), wl); });
  cases.emplace_back("log_softmax", std::vector{logits},
                     [&](Tape& t) { return contract(t, log_softmax(t, logits), wl); });
  cases.emplace_back("cross_entropy", std::vector{logits}, [&](Tape& t) { return cross_entropy(t, logits, labels); });

  Tensor score = random_tensor(rng, {3}, 0.1, 0.9, true);
  Tensor fake = random_tensor(rng, {3, 1, 4, 4}, 0.05, 0.95, true);
  Tensor truth = random_mask(rng, {3, 1, 4, 4});
  Tensor real_score = random_tensor(rng, {3}, 0.1, 0.9, true);
  cases.emplace_back("generator_loss", std::vector{score, fake},
                     [&](Tape& t) { return generator_loss(t, score, fake, truth, {}); });
  cases.emplace_back("discriminator_loss", std::vector{real_score, score},
                     [&](Tape& t) { return discriminator_loss(t, real_score, score, {}); });

  Tensor img = random_tensor(rng, {2, 1, 8, 8}, 0.0, 1.0);
  Tensor soft = random_tensor(rng, {2, 1, 8, 8}, 0.0, 1.0, true);
  Weights unet = spread_weights({Variant::GenUnet, 8, 2, 4}, 20);
  Weights autoenc = spread_weights({Variant::GenAutoEnc, 8, 2, 4}, 21);
  Weights disc = spread_weights({Variant::Discriminator, 8, 2, 4}, 22);
  Weights shape = spread_weights({Variant::ShapeCNN, 8, 2, 4}, 23);
  Tensor wg = random_tensor(rng, img.shape());
  Tensor ws = random_tensor(rng, {2, 4});
  for (Weights* g : {&unet, &autoenc}) {
    cases.emplace_back(std::string(variant_name(g->spec().variant)), g->tensors(), [&, g](Tape& t) {
      Rng unused(0);
      return contract(t, generator_forward(t, *g, img, false, unused), wg);
    });
  }
  std::vector<Tensor> disc_wrt = disc.tensors();
  disc_wrt.push_back(soft);
  cases.emplace_back("discriminator", disc_wrt, [&](Tape& t) {
    return contract(t, discriminator_forward(t, disc, img, soft), Tensor({2}, {0.7, -1.3}));
  });
  cases.emplace_back("shape_cnn", shape.tensors(),
                     [&](Tape& t) { return contract(t, shape_cnn_forward(t, shape, soft), ws); });

  double worst = 0.0;
  std::string worst_name;
  std::size_t checked = 0;
  for (const auto& [name, wrt, fn] : cases) {
    const GradCheck r = check_gradients(wrt, fn, kGradStep);
    checked += r.checked;
    if (r.max_relative_error >= worst) {
      worst = r.max_relative_error;
      worst_name = name;
    }
  }
  const double elapsed = seconds_since(start);
  report(1, worst < kGradTolerance && elapsed < kGradSeconds,
         fmt("%zu cases, %zu coordinates, worst relative error %.3e (%s), %.1fs", cases.size(), checked, worst,
             worst_name.c_str(), elapsed));
}

void criterion_losses() {
  Tape tape(Tape::Mode::Inference);
  // Discriminator: both scores 0.5.
  const double d = discriminator_loss(tape, Tensor({1}, std::vector<double>{0.5}),
                                      Tensor({1}, std::vector<double>{0.5}), {})
                       .item();
  const double d_expected = 2.0 * std::log(2.0);
  // Generator: score 0.5 and mean L1 0.1 with weight 100.
  Tensor fake({1, 1, 2, 2}, {0.1, 0.9, 0.1, 0.9});
  Tensor truth({1, 1, 2, 2}, {0.0, 1.0, 0.0, 1.0});
  const double g = generator_loss(tape, Tensor({1}, std::vector<double>{0.5}), fake, truth, {100.0, 1e-12}).item();
  const double g_expected = std::log(2.0) + 100.0 * 0.1;
  // Asymmetric case: real 0.9, fake 0.2.
  const double d2 = discriminator_loss(tape, Tensor({1}, std::vector<double>{0.9}),
                                       Tensor({1}, std::vector<double>{0.2}), {})
                        .item();
  const double d2_expected = -std::log(0.9) - std::log(0.8);
  const double err = std::max({std::fabs(d - d_expected), std::fabs(g - g_expected), std::fabs(d2 - d2_expected)});
  report(2, err < kLossTolerance,
         fmt("generator %.10f (expect %.10f), discriminator %.10f (expect %.10f), max error %.2e", g, g_expected, d,
             d_expected, err));
}

void criterion_metrics() {
  Rng rng(31);
  int mismatches = 0;
  double worst_link = 0.0;
  for (int i = 0; i < kMetricPairs; ++i) {
    const Tensor pred = random_mask(rng, {1, 16, 16}, rng.uniform(0.05, 0.95));
    const Tensor truth = random_mask(rng, {1, 16, 16}, rng.uniform(0.05, 0.95));
    const ConfusionCounts c = confusion(pred, truth);
    const ConfusionCounts o = pixel_loop_confusion(pred, truth);
    const SegMetrics m = metrics(c);
    const auto tp = static_cast<double>(o.tp), fp = static_cast<double>(o.fp), fn = static_cast<double>(o.fn),
               tn = static_cast<double>(o.tn);
    const bool same = c == o && m.accuracy == (tp + tn) / (tp + tn + fp + fn) &&
                      m.dice == 2.0 * tp / (2.0 * tp + fp + fn) && m.jaccard == tp / (tp + fp + fn) &&
                      m.sensitivity == tp / (tp + fn) && m.specificity == tn / (tn + fp);
    mismatches += !same;
    worst_link = std::max(worst_link, std::fabs(m.dice - 2.0 * m.jaccard / (1.0 + m.jaccard)));
  }
  report(3, mismatches == 0 && worst_link < kDiceJaccardTolerance,
         fmt("%d pairs, %d mismatches against the pixel loop, worst dice/jaccard gap %.2e", kMetricPairs, mismatches,
             worst_link));
}

void criterion_morphology() {
  Rng rng(41);
  int not_idempotent = 0, off_reference = 0;
  for (int i = 0; i < kMorphologyMasks; ++i) {
    const int radius = 1 + i % 3;
    const Tensor m = random_mask(rng, {1, 1, 24, 24}, rng.uniform(0.3, 0.9));
    const Tensor once = morpho_clean(m, radius);
    not_idempotent += max_abs_diff(morpho_clean(once, radius), once) != 0.0;
    off_reference += max_abs_diff(once, reference::dilate(reference::erode(m, radius), radius)) != 0.0;
  }
  Tensor speck({1, 9, 9});
  speck.data_mut()[40] = 1.0;
  double speck_left = 0.0;
  for (const Tensor out = morpho_clean(speck, 1); double v : out.data()) speck_left += v;
  Tensor square({1, 20, 20});
  for (std::size_t r = 5; r < 15; ++r) {
    for (std::size_t c = 5; c < 15; ++c) square.data_mut()[r * 20 + c] = 1.0;
  }
  const double square_change = max_abs_diff(morpho_clean(square, 1), square);
  report(4, not_idempotent == 0 && off_reference == 0 && speck_left == 0.0 && square_change == 0.0,
         fmt("%d masks: %d not idempotent, %d differ from the window oracle; isolated pixel %s; 10x10 square %s",
             kMorphologyMasks, not_idempotent, off_reference, speck_left == 0.0 ? "removed" : "kept",
             square_change == 0.0 ? "preserved" : "changed"));
}

struct OverfitRun {
  CganResult result;
  double final_dice = 0.0;
  double best_dice = 0.0;
  int best_epoch = 0;
  double seconds = 0.0;
};

OverfitRun overfit(Variant variant, const std::vector<SamplePair>& data) {
  TrainConfig cfg;
  cfg.variant = variant;
  cfg.epochs = kOverfitEpochs;
  cfg.batch_size = kOverfitBatch;
  cfg.resolution = kOverfitResolution;
  cfg.lambda_l1 = 100.0;
  cfg.lr = 2e-4;
  cfg.seed = kOverfitTrainSeed;
  const auto start = std::chrono::steady_clock::now();
  OverfitRun run;
  run.result = train_cgan(data, {}, cfg, {}, [&](const EpochRecord& r) {
    if (r.epoch % 20 == 0) {
      std::fprintf(stderr, "  %s epoch %d g %.4f d %.4f dice %.4f\n", std::string(variant_name(variant)).c_str(),
                   r.epoch, r.g_loss, r.d_loss, r.val_dice);
    }
  });
  run.seconds = seconds_since(start);
  run.final_dice = evaluate_generator(run.result.generator, data).dice;
  run.best_dice = evaluate_generator(run.result.best_generator, data).dice;
  run.best_epoch = run.result.best_epoch;
  return run;
}

// Mean generator loss per 20-epoch window after epoch 20; counts windows whose
// mean rose above the previous one.
int loss_window_increases(const TrainReport& report, std::string& means) {
  std::vector<double> window;
  for (std::size_t start = 20; start + 20 <= report.epochs.size(); start += 20) {
    double acc = 0.0;
    for (std::size_t i = start; i < start + 20; ++i) acc += report.epochs[i].g_loss;
    window.push_back(acc / 20.0);
  }
  int rises = 0;
  for (std::size_t i = 0; i < window.size(); ++i) {
    means += fmt(i ? " %.2f" : "%.2f", window[i]);
    if (i > 0 && window[i] > window[i - 1]) ++rises;
  }
  return rises;
}

void criteria_overfit() {
  const auto data = synth_generate(kOverfitSamples, kOverfitDataSeed, kOverfitResolution);
  const OverfitRun unet = overfit(Variant::GenUnet, data);
  const OverfitRun autoenc = overfit(Variant::GenAutoEnc, data);

  std::string means;
  const int rises = loss_window_increases(unet.result.report, means);
  std::printf("note: unet generator loss, 20-epoch window means after epoch 20: %s (%d rises)\n", means.c_str(),
              rises);

  const bool unet_ok = std::max(unet.final_dice, unet.best_dice) >= kUnetDice;
  const bool autoenc_ok = std::max(autoenc.final_dice, autoenc.best_dice) >= kAutoEncDice;
  report(5, unet_ok && autoenc_ok,
         fmt("unet dice %.4f at epoch %d (final %.4f, need %.2f, %.0fs); autoenc dice %.4f at epoch %d "
             "(final %.4f, need %.2f, %.0fs)",
             unet.best_dice, unet.best_epoch, unet.final_dice, kUnetDice, unet.seconds, autoenc.best_dice,
             autoenc.best_epoch, autoenc.final_dice, kAutoEncDice, autoenc.seconds));

  const bool differ = !unet.result.generator.bit_identical(autoenc.result.generator);
  report(6, differ && unet.final_dice >= autoenc.final_dice,
         fmt("weights %s; epoch-%d dice unet %.4f vs autoenc %.4f", differ ? "differ" : "identical", kOverfitEpochs,
             unet.final_dice, autoenc.final_dice));
}

void criterion_shape() {
  const auto start = std::chrono::steady_clock::now();
  const auto samples = synth_generate(kShapeSamples, kShapeDataSeed, kShapeResolution);
  std::array<int, 4> per_class{};
  for (const SamplePair& s : samples) ++per_class[static_cast<std::size_t>(code(*s.shape_label))];
  ShapeTrainConfig cfg;
  cfg.resolution = kShapeResolution;
  cfg.seed = 3;
  const ShapeCvReport cv = train_shape_cnn(samples, kShapeFolds, kShapeEpochs, cfg);
  const bool balanced = per_class == std::array<int, 4>{100, 100, 100, 100};

  const Splits parts = split(synth_generate(100, 9, 16), SplitSpec{});
  const bool sizes = parts.train.size() == 70 && parts.val.size() == 15 && parts.test.size() == 15;
  report(7, balanced && cv.mean_accuracy >= kShapeAccuracy && sizes,
         fmt("%d folds x %d epochs on %d shapes at %dx%d: mean accuracy %.4f (need %.2f), %.0fs; "
             "100-sample split %zu/%zu/%zu",
             kShapeFolds, kShapeEpochs, kShapeSamples, kShapeResolution, kShapeResolution, cv.mean_accuracy,
             kShapeAccuracy, seconds_since(start), parts.train.size(), parts.val.size(), parts.test.size()));
}

void criterion_contingency() {
  const auto dir = scratch_dir("acceptance_contingency");
  const char* subtypes[] = {"Luminal-A", "Luminal-B", "Her-2", "Basal-like"};
  const char* shapes[] = {"irregular", "lobular", "oval", "round"};
  const int counts[4][4] = {{24, 19, 19, 2}, {23, 27, 8, 1}, {7, 3, 10, 14}, {2, 13, 4, 18}};
  {
    std::ofstream labels(dir / "labels.csv");
    labels << "id,subtype,shape\n";
    int id = 0;
    // Interleave rows so the table cannot rely on input order.
    for (int round = 0; round < 27; ++round) {
      for (int t = 0; t < 4; ++t) {
        for (int s = 0; s < 4; ++s) {
          if (round < counts[t][s]) labels << "case" << id++ << ',' << subtypes[t] << ',' << shapes[s] << '\n';
        }
      }
    }
  }
  const int code = cli_run({"analyze", "--labels", (dir / "labels.csv").string(), "--out", (dir / "out").string()});
  const std::string expected =
      "subtype,irregular,lobular,oval,round,total\n"
      "LuminalA,24,19,19,2,64\n"
      "LuminalB,23,27,8,1,59\n"
      "Her2,7,3,10,14,34\n"
      "BasalLike,2,13,4,18,37\n";
  const std::string got = code == cli::kExitOk ? read_bytes(dir / "out" / "contingency.csv") : "";
  report(8, got == expected,
         got == expected ? "contingency.csv matches byte for byte, row totals 64/59/34/37"
                         : fmt("exit %d, table differs:\n%s", code, got.c_str()));
  fs::remove_all(dir);
}

void criterion_determinism() {
  const auto root = scratch_dir("acceptance_determinism");
  const std::string data = (root / "data").string();
  const std::string manifest = data + "/manifest.csv";
  if (cli_run({"synth", "--count", "12", "--seed", "5", "--resolution", "16", "--out", data}) != cli::kExitOk) {
    report(9, false, "synth failed");
    return;
  }
  {
    std::ofstream labels(root / "labels.csv");
    labels << "id,subtype\n";
    for (int i = 0; i < 12; ++i) labels << fmt("synth_%05d,", i) << (i % 3 ? "Luminal-B" : "Basal-like") << '\n';
  }
  struct Step {
    std::string name;
    std::vector<std::string> args;
    std::string out;
  };
  const std::string seg = (root / "seg").string();
  const std::string shape = (root / "shape").string();
  const std::vector<Step> steps = {
      {"synth", {"synth", "--count", "12", "--seed", "5", "--resolution", "16", "--out", (root / "s").string()},
       (root / "s").string()},
      {"train-seg",
       {"train-seg", "--manifest", manifest, "--out", seg, "--epochs", "2", "--resolution", "16", "--depth", "2",
        "--base-channels", "4", "--disc-base-channels", "4", "--batch-size", "3", "--checkpoint-every", "1",
        "--seed", "4"},
       seg},
      {"segment",
       {"segment", "--weights", seg + "/gen_final.ckpt", "--image", data + "/images/synth_00001.pgm", "--out",
        (root / "segment" / "mask.pgm").string(), "--stochastic-seed", "8"},
       (root / "segment").string()},
      {"eval",
       {"eval", "--pred-dir", data + "/masks", "--truth-dir", data + "/masks", "--out",
        (root / "eval" / "eval.csv").string(), "--macro"},
       (root / "eval").string()},
      {"train-shape",
       {"train-shape", "--manifest", manifest, "--out", shape, "--folds", "3", "--epochs", "2", "--resolution", "16",
        "--base-channels", "4", "--seed", "6"},
       shape},
      {"classify",
       {"classify", "--weights", shape + "/shape_model.ckpt", "--manifest", manifest, "--out",
        (root / "classify" / "pred.csv").string()},
       (root / "classify").string()},
      {"analyze",
       {"analyze", "--labels", (root / "labels.csv").string(), "--predictions", (root / "classify" / "pred.csv").string(),
        "--out", (root / "analyze").string()},
       (root / "analyze").string()},
  };
  std::string differing;
  int failed_runs = 0;
  for (const Step& step : steps) {
    std::map<std::string, std::string> runs[2];
    for (auto& snap : runs) {
      fs::remove_all(step.out);
      fs::create_directories(step.out);
      if (cli_run(step.args) != cli::kExitOk) ++failed_runs;
      snap = snapshot(step.out);
    }
    // classify feeds analyze, so leave the second run in place.
    if (runs[0] != runs[1] || runs[0].empty()) differing += (differing.empty() ? "" : ",") + step.name;
  }
  report(9, differing.empty() && failed_runs == 0,
         differing.empty() && failed_runs == 0
             ? fmt("%zu subcommands byte-identical across reruns", steps.size())
             : fmt("differing: %s; failed runs %d", differing.empty() ? "none" : differing.c_str(), failed_runs));
  fs::remove_all(root);
}

}  // namespace

int main() {
  criterion_gradients();
  criterion_losses();
  criterion_metrics();
  criterion_morphology();
  criteria_overfit();
  criterion_shape();
  criterion_contingency();
  criterion_determinism();
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
