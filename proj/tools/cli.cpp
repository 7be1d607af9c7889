#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "cganseg/dataset.hpp"
#include "cganseg/errors.hpp"
#include "cganseg/image.hpp"
#include "cganseg/metrics.hpp"
#include "cganseg/nets.hpp"
#include "cganseg/shape_analysis.hpp"
#include "cganseg/trainer.hpp"

namespace fs = std::filesystem;

namespace cganseg::cli {
namespace {

// Raised for problems with the user's arguments or inputs (exit code 2).
class UsageError : public Error {
 public:
  using Error::Error;
};

std::string fixed(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

// Every resolved option of a run, echoed to run.cfg as "key = value" lines in
// insertion order.
class RunConfig {
 public:
  explicit RunConfig(std::string command) { set("command", std::move(command)); }

  template <typename T>
  void set(const std::string& key, const T& value) {
    std::ostringstream s;
    if constexpr (std::is_floating_point_v<T>) {
      s << fixed(value, 10);
    } else {
      s << value;
    }
    entries_.emplace_back(key, s.str());
  }

  void write(const fs::path& dir) const {
    std::string text;
    for (const auto& [k, v] : entries_) text += k + " = " + v + "\n";
    write_text(dir / "run.cfg", text);
  }

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

fs::path ensure_dir(const std::string& dir) {
  fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw IoError("cannot create directory " + dir + ": " + ec.message());
  return p;
}

fs::path parent_or_cwd(const fs::path& file) {
  fs::path parent = file.parent_path();
  if (parent.empty()) parent = ".";
  ensure_dir(parent.string());
  return parent;
}

void require_file(const std::string& path, const char* what) {
  if (!fs::is_regular_file(path)) throw UsageError(std::string(what) + " not found: " + path);
}

std::vector<fs::path> pgm_files(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw UsageError("not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".pgm") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

Raster binary_raster(const Tensor& mask) {
  return tensor_to_raster(mask.reshaped({1, mask.dim(mask.rank() - 2), mask.dim(mask.rank() - 1)}), 255);
}

// Native-resolution binarization used by eval: value/maxval >= 0.5.
Tensor native_mask(const Raster& r) {
  std::vector<double> values(r.pixels.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    values[i] = static_cast<double>(r.pixels[i]) / r.maxval >= kMaskThreshold ? 1.0 : 0.0;
  }
  return Tensor({1, r.height, r.width}, std::move(values));
}

// ---------------------------------------------------------------- synth

struct SynthOptions {
  int count = 16;
  std::uint64_t seed = 0;
  int resolution = 64;
  std::string out;
};

int run_synth(const SynthOptions& o) {
  const fs::path out = ensure_dir(o.out);
  ensure_dir((out / "images").string());
  ensure_dir((out / "masks").string());
  const std::vector<SamplePair> samples = synth_generate(o.count, o.seed, o.resolution);
  std::string manifest = "id,image,mask,shape,subtype\n";
  for (const SamplePair& s : samples) {
    const std::string image = "images/" + s.id + ".pgm";
    const std::string mask = "masks/" + s.id + ".pgm";
    write_pgm(out / image, tensor_to_raster(s.image, 255));
    write_pgm(out / mask, tensor_to_raster(s.mask, 255));
    manifest += s.id + "," + image + "," + mask + "," + std::string(shape_name(*s.shape_label)) + ",\n";
  }
  write_text(out / "manifest.csv", manifest);
  RunConfig cfg("synth");
  cfg.set("count", o.count);
  cfg.set("seed", o.seed);
  cfg.set("resolution", o.resolution);
  cfg.set("out", o.out);
  cfg.write(out);
  std::cout << "wrote " << samples.size() << " samples to " << out.string() << "\n";
  return kExitOk;
}

// ------------------------------------------------------------ train-seg

struct TrainSegOptions {
  std::string manifest;
  std::string variant = "unet";
  std::string out;
  std::vector<double> split = {0.70, 0.15, 0.15};
  TrainConfig train;
};

std::string report_csv(const TrainReport& report) {
  std::string text = "epoch,g_loss,d_loss,val_dice,val_jaccard\n";
  for (const EpochRecord& r : report.epochs) {
    text += std::to_string(r.epoch) + "," + fixed(r.g_loss) + "," + fixed(r.d_loss) + "," + fixed(r.val_dice) +
            "," + fixed(r.val_jaccard) + "\n";
  }
  return text;
}

int run_train_seg(TrainSegOptions o) {
  require_file(o.manifest, "manifest");
  if (o.variant == "unet") {
    o.train.variant = Variant::GenUnet;
  } else if (o.variant == "autoenc") {
    o.train.variant = Variant::GenAutoEnc;
  } else {
    throw UsageError("--variant must be unet or autoenc");
  }
  if (o.split.size() != 3) throw UsageError("--split takes three fractions");
  o.train.validate();
  SplitSpec split_spec{o.split[0], o.split[1], o.split[2], o.train.seed, std::nullopt};
  split_spec.validate();

  const fs::path out = ensure_dir(o.out);
  const std::vector<SamplePair> samples = load_dataset(o.manifest, o.train.resolution);
  if (samples.empty()) throw UsageError("manifest lists no samples: " + o.manifest);
  const Splits parts = split(samples, split_spec);
  if (parts.train.empty()) throw UsageError("the split leaves no training samples");

  std::string split_csv = "id,bucket\n";
  for (const auto& [bucket, list] : {std::pair{"train", &parts.train}, {"val", &parts.val}, {"test", &parts.test}}) {
    for (const SamplePair& s : *list) split_csv += s.id + "," + bucket + "\n";
  }
  write_text(out / "split.csv", split_csv);

  RunConfig cfg("train-seg");
  cfg.set("manifest", o.manifest);
  cfg.set("variant", o.variant);
  cfg.set("epochs", o.train.epochs);
  cfg.set("batch_size", o.train.batch_size);
  cfg.set("lr", o.train.lr);
  cfg.set("beta1", o.train.beta1);
  cfg.set("beta2", o.train.beta2);
  cfg.set("lambda", o.train.lambda_l1);
  cfg.set("epsilon_log", o.train.epsilon_log);
  cfg.set("seed", o.train.seed);
  cfg.set("resolution", o.train.resolution);
  cfg.set("depth", o.train.depth);
  cfg.set("base_channels", o.train.base_channels);
  cfg.set("disc_base_channels", o.train.disc_base_channels);
  cfg.set("checkpoint_every", o.train.checkpoint_every);
  cfg.set("threshold", o.train.threshold);
  cfg.set("split_train", split_spec.train);
  cfg.set("split_val", split_spec.val);
  cfg.set("split_test", split_spec.test);
  cfg.set("out", o.out);
  cfg.write(out);

  const auto checkpoint = [&](int epoch, const Weights& g, const Weights& d) {
    char tag[32];
    std::snprintf(tag, sizeof tag, "%04d", epoch);
    save_weights(g, out / ("gen_epoch_" + std::string(tag) + ".ckpt"));
    save_weights(d, out / ("disc_epoch_" + std::string(tag) + ".ckpt"));
  };
  const auto progress = [](const EpochRecord& r) {
    std::cerr << "epoch " << r.epoch << "  g_loss " << fixed(r.g_loss, 4) << "  d_loss " << fixed(r.d_loss, 4)
              << "  val_dice " << fixed(r.val_dice, 4) << "  (" << fixed(r.seconds, 2) << "s)\n";
  };
  const CganResult result = train_cgan(parts.train, parts.val, o.train, checkpoint, progress);
  write_text(out / "report.csv", report_csv(result.report));
  save_weights(result.generator, out / "gen_final.ckpt");
  save_weights(result.discriminator, out / "disc_final.ckpt");
  save_weights(result.best_generator, out / "gen_best.ckpt");
  const EpochRecord& last = result.report.epochs.back();
  std::cout << "final " << (result.report.validated_on_train ? "train" : "val") << " dice "
            << fixed(last.val_dice, 4) << ", best epoch " << result.best_epoch << "\n";
  return kExitOk;
}

// -------------------------------------------------------------- segment

struct SegmentOptions {
  std::string weights;
  std::string image;
  std::string out;
  double threshold = 0.5;
  int clean_radius = 1;
  std::optional<std::uint64_t> stochastic_seed;
};

int run_segment(const SegmentOptions& o) {
  require_file(o.weights, "weights");
  require_file(o.image, "image");
  if (!(o.threshold > 0.0 && o.threshold < 1.0)) throw UsageError("--threshold must lie in (0,1)");
  if (o.clean_radius < 0) throw UsageError("--clean-radius must be >= 0");
  const Weights generator = load_weights(o.weights);
  if (!is_generator(generator.spec().variant)) throw UsageError(o.weights + " is not a generator checkpoint");
  const Tensor image = preprocess(read_pgm(o.image), generator.spec().input_resolution);
  std::optional<Rng> rng;
  if (o.stochastic_seed) rng.emplace(*o.stochastic_seed);
  Tensor mask = segment(generator, image, o.threshold, rng ? &*rng : nullptr);
  if (o.clean_radius > 0) mask = morpho_clean(mask, o.clean_radius);
  const fs::path out(o.out);
  const fs::path dir = parent_or_cwd(out);
  write_pgm(out, binary_raster(mask));
  RunConfig cfg("segment");
  cfg.set("weights", o.weights);
  cfg.set("image", o.image);
  cfg.set("out", o.out);
  cfg.set("threshold", o.threshold);
  cfg.set("clean_radius", o.clean_radius);
  cfg.set("stochastic_seed", o.stochastic_seed ? std::to_string(*o.stochastic_seed) : std::string("none"));
  cfg.write(dir);
  return kExitOk;
}

// ----------------------------------------------------------------- eval

struct EvalOptions {
  std::string pred_dir;
  std::string truth_dir;
  std::string out;
  bool macro = false;
};

std::string vacuous_field(unsigned flags) {
  std::string s;
  const std::pair<unsigned, const char*> names[] = {{kVacuousDice, "dice"},
                                                    {kVacuousJaccard, "jaccard"},
                                                    {kVacuousSensitivity, "sensitivity"},
                                                    {kVacuousSpecificity, "specificity"}};
  for (const auto& [bit, name] : names) {
    if (flags & bit) s += (s.empty() ? "" : ";") + std::string(name);
  }
  return s;
}

std::string metrics_row(const std::string& id, const SegMetrics& m) {
  return id + "," + fixed(m.accuracy) + "," + fixed(m.dice) + "," + fixed(m.jaccard) + "," + fixed(m.sensitivity) +
         "," + fixed(m.specificity) + "," + vacuous_field(m.vacuous) + "\n";
}

int run_eval(const EvalOptions& o) {
  const std::vector<fs::path> preds = pgm_files(o.pred_dir);
  const std::vector<fs::path> truths = pgm_files(o.truth_dir);
  std::set<std::string> pred_names, truth_names;
  for (const auto& p : preds) pred_names.insert(p.filename().string());
  for (const auto& p : truths) truth_names.insert(p.filename().string());
  std::vector<std::string> offenders;
  for (const auto& n : pred_names) {
    if (!truth_names.count(n)) offenders.push_back(o.pred_dir + "/" + n + " (no ground truth)");
  }
  for (const auto& n : truth_names) {
    if (!pred_names.count(n)) offenders.push_back(o.truth_dir + "/" + n + " (no prediction)");
  }
  if (!offenders.empty()) {
    std::string msg = "unmatched mask files:";
    for (const auto& s : offenders) msg += "\n  " + s;
    throw UsageError(msg);
  }
  if (preds.empty()) throw UsageError("no .pgm masks in " + o.pred_dir);

  std::string csv = "id,accuracy,dice,jaccard,sensitivity,specificity,vacuous\n";
  ConfusionCounts pooled;
  std::vector<SegMetrics> per_image;
  for (const auto& name : pred_names) {
    const Tensor pred = native_mask(read_pgm(fs::path(o.pred_dir) / name));
    const Tensor truth = native_mask(read_pgm(fs::path(o.truth_dir) / name));
    if (pred.shape() != truth.shape()) {
      throw UsageError(name + ": prediction " + shape_to_string(pred.shape()) + " and truth " +
                       shape_to_string(truth.shape()) + " differ in size");
    }
    const ConfusionCounts c = confusion(pred, truth);
    pooled += c;
    per_image.push_back(metrics(c));
    csv += metrics_row(fs::path(name).stem().string(), per_image.back());
  }
  if (o.macro) csv += metrics_row("macro", macro_average(per_image));
  const SegMetrics overall = metrics(pooled);
  csv += metrics_row("pooled", overall);
  const fs::path out(o.out);
  const fs::path dir = parent_or_cwd(out);
  write_text(out, csv);
  RunConfig cfg("eval");
  cfg.set("pred_dir", o.pred_dir);
  cfg.set("truth_dir", o.truth_dir);
  cfg.set("out", o.out);
  cfg.set("macro", o.macro ? "true" : "false");
  cfg.write(dir);
  std::cout << "pooled dice " << fixed(overall.dice, 4) << ", jaccard " << fixed(overall.jaccard, 4) << " over "
            << per_image.size() << " masks\n";
  return kExitOk;
}

// ---------------------------------------------------------- train-shape

struct TrainShapeOptions {
  std::string manifest;
  std::string out;
  int folds = 10;
  int epochs = 50;
  ShapeTrainConfig shape;
};

std::string confusion_csv(const ClassMatrix& m) {
  std::string text = "truth\\predicted";
  for (ShapeLabel s : kAllShapes) text += "," + std::string(shape_name(s));
  text += "\n";
  for (ShapeLabel t : kAllShapes) {
    text += std::string(shape_name(t));
    for (std::uint64_t v : m[static_cast<std::size_t>(code(t))]) text += "," + std::to_string(v);
    text += "\n";
  }
  return text;
}

int run_train_shape(const TrainShapeOptions& o) {
  require_file(o.manifest, "manifest");
  o.shape.validate();
  const fs::path out = ensure_dir(o.out);
  const std::vector<SamplePair> samples = load_dataset(o.manifest, o.shape.resolution);
  if (samples.empty()) throw UsageError("manifest lists no samples: " + o.manifest);

  RunConfig cfg("train-shape");
  cfg.set("manifest", o.manifest);
  cfg.set("folds", o.folds);
  cfg.set("epochs", o.epochs);
  cfg.set("batch_size", o.shape.batch_size);
  cfg.set("lr", o.shape.lr);
  cfg.set("beta1", o.shape.beta1);
  cfg.set("beta2", o.shape.beta2);
  cfg.set("seed", o.shape.seed);
  cfg.set("resolution", o.shape.resolution);
  cfg.set("base_channels", o.shape.base_channels);
  cfg.set("out", o.out);
  cfg.write(out);

  const ShapeCvReport report = train_shape_cnn(samples, o.folds, o.epochs, o.shape);
  std::string csv = "fold,test_count,accuracy\n";
  std::size_t best = 0;
  for (std::size_t f = 0; f < report.folds.size(); ++f) {
    const FoldResult& r = report.folds[f];
    csv += std::to_string(f) + "," + std::to_string(r.test_count) + "," + fixed(r.accuracy) + "\n";
    char name[32];
    std::snprintf(name, sizeof name, "fold_%02zu.ckpt", f);
    save_weights(r.weights, out / name);
    if (r.accuracy > report.folds[best].accuracy) best = f;
  }
  csv += "mean,," + fixed(report.mean_accuracy) + "\n";
  write_text(out / "cv_report.csv", csv);
  write_text(out / "confusion.csv", confusion_csv(report.confusion));
  save_weights(report.folds[best].weights, out / "shape_model.ckpt");
  std::cout << "mean cross-validation accuracy " << fixed(report.mean_accuracy, 4) << " (model from fold " << best
            << ")\n";
  return kExitOk;
}

// ------------------------------------------------------------- classify

struct ClassifyOptions {
  std::string weights;
  std::string manifest;
  std::string mask_dir;
  std::string out;
};

int run_classify(const ClassifyOptions& o) {
  require_file(o.weights, "weights");
  if (o.manifest.empty() == o.mask_dir.empty()) throw UsageError("give exactly one of --manifest or --mask-dir");
  const Weights weights = load_weights(o.weights);
  if (weights.spec().variant != Variant::ShapeCNN) throw UsageError(o.weights + " is not a shape-classifier checkpoint");
  const int resolution = weights.spec().input_resolution;

  std::vector<std::string> ids;
  std::vector<Tensor> masks;
  if (!o.manifest.empty()) {
    require_file(o.manifest, "manifest");
    for (SamplePair& s : load_dataset(o.manifest, resolution)) {
      ids.push_back(s.id);
      masks.push_back(s.mask);
    }
  } else {
    for (const fs::path& p : pgm_files(o.mask_dir)) {
      ids.push_back(p.stem().string());
      masks.push_back(binarize_mask(read_pgm(p), resolution));
    }
  }
  const std::vector<ShapeLabel> labels = classify_shapes(weights, masks);
  std::string csv = "id,code,shape\n";
  for (std::size_t i = 0; i < labels.size(); ++i) {
    csv += ids[i] + "," + std::to_string(code(labels[i])) + "," + std::string(shape_name(labels[i])) + "\n";
  }
  const fs::path out(o.out);
  const fs::path dir = parent_or_cwd(out);
  write_text(out, csv);
  RunConfig cfg("classify");
  cfg.set("weights", o.weights);
  cfg.set("manifest", o.manifest.empty() ? std::string("none") : o.manifest);
  cfg.set("mask_dir", o.mask_dir.empty() ? std::string("none") : o.mask_dir);
  cfg.set("out", o.out);
  cfg.write(dir);
  std::cout << "classified " << labels.size() << " masks\n";
  return kExitOk;
}

// -------------------------------------------------------------- analyze

struct AnalyzeOptions {
  std::string labels;
  std::string predictions;
  std::string out;
};

// Reads a CSV with a header row into maps keyed by the header names.
std::vector<std::map<std::string, std::string>> read_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open " + path);
  std::vector<std::string> header;
  std::vector<std::map<std::string, std::string>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) {
      const auto a = f.find_first_not_of(" \t");
      const auto b = f.find_last_not_of(" \t");
      fields.push_back(a == std::string::npos ? std::string() : f.substr(a, b - a + 1));
    }
    if (line.back() == ',') fields.emplace_back();
    if (header.empty()) {
      header = fields;
      continue;
    }
    if (fields.size() != header.size()) {
      throw UsageError(path + ":" + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                       " fields, got " + std::to_string(fields.size()));
    }
    std::map<std::string, std::string> row;
    for (std::size_t i = 0; i < header.size(); ++i) row[header[i]] = fields[i];
    row["#line"] = std::to_string(line_no);
    rows.push_back(std::move(row));
  }
  return rows;
}

int run_analyze(const AnalyzeOptions& o) {
  require_file(o.labels, "labels file");
  std::map<std::string, ShapeLabel> predicted;
  if (!o.predictions.empty()) {
    require_file(o.predictions, "predictions file");
    for (const auto& row : read_table(o.predictions)) {
      if (!row.count("id") || !row.count("shape")) throw UsageError(o.predictions + " needs id and shape columns");
      const auto shape = parse_shape(row.at("shape"));
      if (!shape) throw UsageError(o.predictions + ":" + row.at("#line") + ": unknown shape " + row.at("shape"));
      predicted[row.at("id")] = *shape;
    }
  }
  std::vector<std::pair<Subtype, ShapeLabel>> pairs;
  for (const auto& row : read_table(o.labels)) {
    const std::string where = o.labels + ":" + row.at("#line");
    if (!row.count("subtype")) throw UsageError(o.labels + " needs a subtype column");
    const auto subtype = parse_subtype(row.at("subtype"));
    if (!subtype) throw UsageError(where + ": unknown subtype " + row.at("subtype"));
    std::optional<ShapeLabel> shape;
    if (!predicted.empty()) {
      if (!row.count("id")) throw UsageError(o.labels + " needs an id column to join predictions");
      auto it = predicted.find(row.at("id"));
      if (it == predicted.end()) throw UsageError(where + ": no prediction for id " + row.at("id"));
      shape = it->second;
    } else {
      if (!row.count("shape")) throw UsageError(o.labels + " needs a shape column (or pass --predictions)");
      shape = parse_shape(row.at("shape"));
      if (!shape) throw UsageError(where + ": unknown shape " + row.at("shape"));
    }
    pairs.emplace_back(*subtype, *shape);
  }
  if (pairs.empty()) throw UsageError("no labelled rows in " + o.labels);
  const ContingencyTable table = contingency(pairs);
  const fs::path out = ensure_dir(o.out);
  write_text(out / "contingency.csv", contingency_csv(table));
  const std::string text = contingency_text(table);
  write_text(out / "contingency.txt", text);
  RunConfig cfg("analyze");
  cfg.set("labels", o.labels);
  cfg.set("predictions", o.predictions.empty() ? std::string("none") : o.predictions);
  cfg.set("out", o.out);
  cfg.write(out);
  std::cout << text;
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"Adversarial mass segmentation and shape classification toolkit", "cganseg"};
  app.require_subcommand(1);
  int status = kExitOk;

  SynthOptions synth;
  auto* synth_cmd = app.add_subcommand("synth", "Render a synthetic ROI/mask dataset with a manifest");
  synth_cmd->add_option("--count", synth.count, "Number of samples")->check(CLI::PositiveNumber)->capture_default_str();
  synth_cmd->add_option("--seed", synth.seed, "Random seed")->capture_default_str();
  synth_cmd->add_option("--resolution", synth.resolution, "Square image size")->check(CLI::Range(8, 4096))
      ->capture_default_str();
  synth_cmd->add_option("--out", synth.out, "Output directory")->required();
  synth_cmd->callback([&] { status = run_synth(synth); });

  TrainSegOptions ts;
  auto* ts_cmd = app.add_subcommand("train-seg", "Train the segmentation cGAN");
  ts_cmd->add_option("--manifest", ts.manifest, "Dataset manifest CSV")->required();
  ts_cmd->add_option("--variant", ts.variant, "Generator variant")->check(CLI::IsMember({"unet", "autoenc"}))
      ->capture_default_str();
  ts_cmd->add_option("--epochs", ts.train.epochs)->capture_default_str();
  ts_cmd->add_option("--lambda", ts.train.lambda_l1, "Weight of the L1 term")->capture_default_str();
  ts_cmd->add_option("--resolution", ts.train.resolution)->capture_default_str();
  ts_cmd->add_option("--seed", ts.train.seed)->capture_default_str();
  ts_cmd->add_option("--out", ts.out, "Output directory")->required();
  ts_cmd->add_option("--batch-size", ts.train.batch_size)->capture_default_str();
  ts_cmd->add_option("--lr", ts.train.lr)->capture_default_str();
  ts_cmd->add_option("--beta1", ts.train.beta1)->capture_default_str();
  ts_cmd->add_option("--beta2", ts.train.beta2)->capture_default_str();
  ts_cmd->add_option("--depth", ts.train.depth)->capture_default_str();
  ts_cmd->add_option("--base-channels", ts.train.base_channels)->capture_default_str();
  ts_cmd->add_option("--disc-base-channels", ts.train.disc_base_channels)->capture_default_str();
  ts_cmd->add_option("--checkpoint-every", ts.train.checkpoint_every, "Epochs between checkpoints (0 = off)")
      ->capture_default_str();
  ts_cmd->add_option("--threshold", ts.train.threshold, "Mask threshold for validation")->capture_default_str();
  ts_cmd->add_option("--split", ts.split, "train,val,test fractions")->delimiter(',')->expected(3)
      ->capture_default_str();
  ts_cmd->callback([&] { status = run_train_seg(ts); });

  SegmentOptions seg;
  auto* seg_cmd = app.add_subcommand("segment", "Segment one ROI image with a trained generator");
  seg_cmd->add_option("--weights", seg.weights, "Generator checkpoint")->required();
  seg_cmd->add_option("--image", seg.image, "Input PGM")->required();
  seg_cmd->add_option("--out", seg.out, "Output mask PGM")->required();
  seg_cmd->add_option("--threshold", seg.threshold)->capture_default_str();
  seg_cmd->add_option("--clean-radius", seg.clean_radius, "Opening radius, 0 disables")->capture_default_str();
  seg_cmd->add_option("--stochastic-seed", seg.stochastic_seed, "Keep dropout active, seeded");
  seg_cmd->callback([&] { status = run_segment(seg); });

  EvalOptions ev;
  auto* ev_cmd = app.add_subcommand("eval", "Score predicted masks against ground truth");
  ev_cmd->add_option("--pred-dir", ev.pred_dir)->required();
  ev_cmd->add_option("--truth-dir", ev.truth_dir)->required();
  ev_cmd->add_option("--out", ev.out, "Metrics CSV")->required();
  ev_cmd->add_flag("--macro", ev.macro, "Also report the per-image average");
  ev_cmd->callback([&] { status = run_eval(ev); });

  TrainShapeOptions tsh;
  auto* tsh_cmd = app.add_subcommand("train-shape", "Cross-validate the mask shape classifier");
  tsh_cmd->add_option("--manifest", tsh.manifest)->required();
  tsh_cmd->add_option("--out", tsh.out)->required();
  tsh_cmd->add_option("--folds", tsh.folds)->check(CLI::Range(2, 1000))->capture_default_str();
  tsh_cmd->add_option("--epochs", tsh.epochs)->check(CLI::PositiveNumber)->capture_default_str();
  tsh_cmd->add_option("--resolution", tsh.shape.resolution)->capture_default_str();
  tsh_cmd->add_option("--seed", tsh.shape.seed)->capture_default_str();
  tsh_cmd->add_option("--batch-size", tsh.shape.batch_size)->capture_default_str();
  tsh_cmd->add_option("--lr", tsh.shape.lr)->capture_default_str();
  tsh_cmd->add_option("--base-channels", tsh.shape.base_channels)->capture_default_str();
  tsh_cmd->callback([&] { status = run_train_shape(tsh); });

  ClassifyOptions cl;
  auto* cl_cmd = app.add_subcommand("classify", "Assign a shape class to binary masks");
  cl_cmd->add_option("--weights", cl.weights)->required();
  cl_cmd->add_option("--manifest", cl.manifest, "Classify the manifest's masks");
  cl_cmd->add_option("--mask-dir", cl.mask_dir, "Classify every .pgm in a directory");
  cl_cmd->add_option("--out", cl.out, "Output CSV")->required();
  cl_cmd->callback([&] { status = run_classify(cl); });

  AnalyzeOptions an;
  auto* an_cmd = app.add_subcommand("analyze", "Cross-tabulate molecular subtype against mask shape");
  an_cmd->add_option("--labels", an.labels, "CSV with id,subtype[,shape]")->required();
  an_cmd->add_option("--predictions", an.predictions, "classify output to take shapes from");
  an_cmd->add_option("--out", an.out, "Output directory")->required();
  an_cmd->callback([&] { status = run_analyze(an); });

  std::vector<std::string> argv(args.begin() + (args.empty() ? 0 : 1), args.end());
  std::reverse(argv.begin(), argv.end());
  try {
    app.parse(argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    for (CLI::App* sub : app.get_subcommands()) std::cerr << sub->help();
    return kExitUsage;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return status;
}

}  // namespace cganseg::cli
