#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cganseg/image.hpp"
#include "cganseg/labels.hpp"
#include "cganseg/tensor.hpp"

namespace cganseg {

/// Preprocessed ROI image and its binary ground-truth mask, both [1,R,R].
struct SamplePair {
  Tensor image;  // values in [0,1]
  Tensor mask;   // values exactly 0 or 1
  std::string id;
  std::optional<ShapeLabel> shape_label;
  std::optional<Subtype> subtype_label;

  std::size_t resolution() const { return image.dim(2); }
  // Throws InvalidArgument on shape disagreement, out-of-range image values
  // or a non-binary mask.
  void validate() const;
};

constexpr double kMaskThreshold = 0.5;

// resize (bilinear) -> divide by maxval into [0,1] -> Gaussian smoothing
// (sigma 0.5, radius 2). Returns [1,R,R].
Tensor preprocess(const Raster& raw_image, int target_resolution);
// resize (bilinear) -> divide by maxval -> value >= threshold ? 1 : 0.
Tensor binarize_mask(const Raster& raw_mask, int target_resolution, double threshold = kMaskThreshold);

enum class StratifyBy { Shape, Subtype };

struct SplitSpec {
  double train = 0.70;
  double val = 0.15;
  double test = 0.15;
  std::uint64_t seed = 0;
  std::optional<StratifyBy> stratify_by;

  void validate() const;
};

struct Splits {
  std::vector<SamplePair> train;
  std::vector<SamplePair> val;
  std::vector<SamplePair> test;
};

// Bucket sizes per stratum follow the largest-remainder rule; ties rotate
// across strata so the global totals stay balanced. Within every bucket the
// original input order is kept.
Splits split(const std::vector<SamplePair>& samples, const SplitSpec& spec);

// Index-level form of split(): bucket (0 train, 1 val, 2 test) of every item
// given its stratum key.
std::vector<int> assign_split_buckets(const std::vector<int>& strata, const SplitSpec& spec);

// Manifest: UTF-8 CSV with header "id,image,mask[,shape[,subtype]]". Paths
// are relative to the manifest's directory. Label fields may be empty.
std::vector<SamplePair> load_dataset(const std::filesystem::path& manifest, int resolution = 64,
                                     double mask_threshold = kMaskThreshold);

// Synthetic stand-in for annotated ROIs. Sample i gets shape class i % 4:
//   irregular - jagged polygon with random vertex radii
//   lobular   - smooth radial outline with 3..5 lobes
//   oval      - ellipse with axis ratio 0.45..0.65, random rotation
//   round     - disc
// Images blend the mask into smooth textured noise and are blurred.
std::vector<SamplePair> synth_generate(int count, std::uint64_t seed, int resolution);

}  // namespace cganseg
