#include "cganseg/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "cganseg/errors.hpp"
#include "cganseg/rng.hpp"

namespace cganseg {

void SamplePair::validate() const {
  if (!image.defined() || !mask.defined()) throw InvalidArgument("sample " + id + " is missing image or mask");
  if (image.shape() != mask.shape() || image.rank() != 3 || image.dim(0) != 1 || image.dim(1) != image.dim(2)) {
    throw InvalidArgument("sample " + id + ": image " + shape_to_string(image.shape()) + " and mask " +
                          shape_to_string(mask.shape()) + " must both be [1,R,R]");
  }
  for (double v : image.data()) {
    if (!(v >= 0.0 && v <= 1.0)) throw InvalidArgument("sample " + id + ": image value outside [0,1]");
  }
  for (double v : mask.data()) {
    if (v != 0.0 && v != 1.0) throw InvalidArgument("sample " + id + ": mask is not binary");
  }
}

namespace {

Image resized_unit(const Raster& raw, int target_resolution) {
  if (raw.width == 0 || raw.height == 0 || raw.pixels.size() != raw.width * raw.height) {
    throw InvalidArgument("zero-extent or inconsistent raster");
  }
  if (target_resolution < 1) throw InvalidArgument("target resolution must be positive");
  const std::size_t r = static_cast<std::size_t>(target_resolution);
  Image img = resize_bilinear(to_image(raw), r, r);
  const double scale = 1.0 / static_cast<double>(raw.maxval);
  for (double& v : img.values) v = std::clamp(v * scale, 0.0, 1.0);
  return img;
}

Tensor as_tensor(const Image& img) {
  return Tensor({1, img.height, img.width}, img.values);
}

}  // namespace

Tensor preprocess(const Raster& raw_image, int target_resolution) {
  return as_tensor(gaussian_smooth(resized_unit(raw_image, target_resolution)));
}

Tensor binarize_mask(const Raster& raw_mask, int target_resolution, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) throw InvalidArgument("mask threshold must lie in (0,1)");
  Image img = resized_unit(raw_mask, target_resolution);
  for (double& v : img.values) v = v >= threshold ? 1.0 : 0.0;
  return as_tensor(img);
}

void SplitSpec::validate() const {
  for (double f : {train, val, test}) {
    if (!(f >= 0.0 && f <= 1.0)) throw InvalidArgument("split fractions must lie in [0,1]");
  }
  if (std::fabs(train + val + test - 1.0) > 1e-9) throw InvalidArgument("split fractions must sum to 1");
}

std::vector<int> assign_split_buckets(const std::vector<int>& strata, const SplitSpec& spec) {
  spec.validate();
  const double fractions[3] = {spec.train, spec.val, spec.test};
  std::map<int, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < strata.size(); ++i) members[strata[i]].push_back(i);

  // Global targets by largest remainder, used to break ties between strata.
  const double total = static_cast<double>(strata.size());
  long targets[3];
  {
    double fracs[3];
    long assigned = 0;
    for (int b = 0; b < 3; ++b) {
      const double q = total * fractions[b];
      targets[b] = static_cast<long>(std::floor(q + 1e-9));
      fracs[b] = q - static_cast<double>(targets[b]);
      assigned += targets[b];
    }
    for (long left = static_cast<long>(strata.size()) - assigned; left > 0; --left) {
      int best = 0;
      for (int b = 1; b < 3; ++b) {
        if (fracs[b] > fracs[best] + 1e-9) best = b;
      }
      ++targets[best];
      fracs[best] = -1.0;
    }
  }

  struct Stratum {
    std::vector<std::size_t> items;
    long counts[3];
    double fracs[3];
    long leftover;
  };
  std::vector<Stratum> groups;
  long assigned[3] = {0, 0, 0};
  for (auto& [key, items] : members) {
    Stratum s{items, {0, 0, 0}, {0, 0, 0}, 0};
    long used = 0;
    for (int b = 0; b < 3; ++b) {
      const double q = static_cast<double>(items.size()) * fractions[b];
      s.counts[b] = static_cast<long>(std::floor(q + 1e-9));
      s.fracs[b] = q - static_cast<double>(s.counts[b]);
      used += s.counts[b];
      assigned[b] += s.counts[b];
    }
    s.leftover = static_cast<long>(items.size()) - used;
    groups.push_back(std::move(s));
  }
  for (Stratum& s : groups) {
    bool bumped[3] = {false, false, false};
    for (long k = 0; k < s.leftover; ++k) {
      int best = -1;
      for (int b = 0; b < 3; ++b) {
        if (bumped[b] || fractions[b] == 0.0) continue;
        if (best < 0) {
          best = b;
          continue;
        }
        const double df = s.fracs[b] - s.fracs[best];
        const long deficit_b = targets[b] - assigned[b];
        const long deficit_best = targets[best] - assigned[best];
        if (df > 1e-9 || (std::fabs(df) <= 1e-9 && deficit_b > deficit_best)) best = b;
      }
      if (best < 0) best = 0;
      bumped[best] = true;
      ++s.counts[best];
      ++assigned[best];
    }
  }

  std::vector<int> bucket(strata.size(), 0);
  Rng rng(spec.seed);
  for (Stratum& s : groups) {
    rng.shuffle(s.items);
    std::size_t pos = 0;
    for (int b = 0; b < 3; ++b) {
      for (long k = 0; k < s.counts[b]; ++k) bucket[s.items[pos++]] = b;
    }
  }
  return bucket;
}

Splits split(const std::vector<SamplePair>& samples, const SplitSpec& spec) {
  std::vector<int> strata(samples.size(), 0);
  if (spec.stratify_by) {
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const SamplePair& s = samples[i];
      if (*spec.stratify_by == StratifyBy::Shape) {
        if (!s.shape_label) throw InvalidArgument("sample " + s.id + " has no shape label to stratify by");
        strata[i] = code(*s.shape_label);
      } else {
        if (!s.subtype_label) throw InvalidArgument("sample " + s.id + " has no subtype label to stratify by");
        strata[i] = code(*s.subtype_label);
      }
    }
  }
  const std::vector<int> bucket = assign_split_buckets(strata, spec);
  Splits out;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    (bucket[i] == 0 ? out.train : bucket[i] == 1 ? out.val : out.test).push_back(samples[i]);
  }
  return out;
}

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(trim(field));
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

}  // namespace

std::vector<SamplePair> load_dataset(const std::filesystem::path& manifest, int resolution, double mask_threshold) {
  std::ifstream in(manifest);
  if (!in) throw IoError("cannot open manifest " + manifest.string());
  const std::filesystem::path base = manifest.parent_path();
  const std::string where = manifest.string();

  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::vector<SamplePair> samples;
  std::set<std::string> ids;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<std::string> fields = split_fields(line);
    const std::string at = where + ":" + std::to_string(line_no);
    if (!header_seen) {
      if (line_no == 1 && line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) {
        fields = split_fields(line.substr(3));  // UTF-8 byte order mark
      }
      if (fields.size() < 3 || fields[0] != "id" || fields[1] != "image" || fields[2] != "mask") {
        throw FormatError(at + ": manifest header must start with id,image,mask");
      }
      header_seen = true;
      continue;
    }
    if (fields.size() < 3 || fields.size() > 5) {
      throw FormatError(at + ": expected 3 to 5 comma-separated fields, got " + std::to_string(fields.size()));
    }
    SamplePair s;
    s.id = fields[0];
    if (s.id.empty()) throw FormatError(at + ": empty id");
    if (!ids.insert(s.id).second) throw FormatError(at + ": duplicate id " + s.id);
    if (fields.size() > 3 && !fields[3].empty()) {
      s.shape_label = parse_shape(fields[3]);
      if (!s.shape_label) throw FormatError(at + ": unknown shape label '" + fields[3] + "'");
    }
    if (fields.size() > 4 && !fields[4].empty()) {
      s.subtype_label = parse_subtype(fields[4]);
      if (!s.subtype_label) throw FormatError(at + ": unknown subtype label '" + fields[4] + "'");
    }
    const std::filesystem::path image_path = base / fields[1];
    const std::filesystem::path mask_path = base / fields[2];
    for (const auto& p : {image_path, mask_path}) {
      if (!std::filesystem::exists(p)) {
        throw IoError(at + " (id " + s.id + "): file not found: " + p.string());
      }
    }
    try {
      s.image = preprocess(read_pgm(image_path), resolution);
      s.mask = binarize_mask(read_pgm(mask_path), resolution, mask_threshold);
    } catch (const Error& e) {
      throw FormatError(at + " (id " + s.id + "): " + e.what());
    }
    samples.push_back(std::move(s));
  }
  return samples;
}

}  // namespace cganseg
