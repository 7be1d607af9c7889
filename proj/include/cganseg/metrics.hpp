#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "cganseg/tensor.hpp"

namespace cganseg {

struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fn = 0;

  std::uint64_t total() const { return tp + fp + tn + fn; }
  ConfusionCounts& operator+=(const ConfusionCounts& o) {
    tp += o.tp;
    fp += o.fp;
    tn += o.tn;
    fn += o.fn;
    return *this;
  }
  bool operator==(const ConfusionCounts&) const = default;
};

// Bits of SegMetrics::vacuous, set when a ratio was 0/0 and reported as 1.
enum VacuousFlag : unsigned {
  kVacuousDice = 1u << 0,
  kVacuousJaccard = 1u << 1,
  kVacuousSensitivity = 1u << 2,
  kVacuousSpecificity = 1u << 3,
};

struct SegMetrics {
  double accuracy = 0.0;
  double dice = 0.0;
  double jaccard = 0.0;
  double sensitivity = 0.0;
  double specificity = 0.0;
  unsigned vacuous = 0;
};

// Pixel tallies of pred against truth. Both must be strictly binary and equal
// in shape (InvalidArgument / ShapeError otherwise).
ConfusionCounts confusion(const Tensor& pred, const Tensor& truth);

// accuracy (tp+tn)/total, dice 2tp/(2tp+fp+fn), jaccard tp/(tp+fp+fn),
// sensitivity tp/(tp+fn), specificity tn/(tn+fp). 0/0 yields 1 and sets the
// matching vacuous bit. Throws InvalidArgument when total is zero.
SegMetrics metrics(const ConfusionCounts& c);

// Micro-average: counts pooled over every pair, metrics computed once.
SegMetrics evaluate_set(const std::vector<std::pair<Tensor, Tensor>>& pairs);
// Per-image metrics averaged with equal weight.
SegMetrics macro_average(const std::vector<SegMetrics>& per_image);

// Binary erosion/dilation of the trailing HxW plane(s) of `mask` with a
// square structuring element of side 2*radius+1. Pixels outside the image
// count as background for erosion.
Tensor erode(const Tensor& mask, int radius);
Tensor dilate(const Tensor& mask, int radius);
// Opening (erode then dilate): removes foreground parts the square cannot
// fit inside. radius >= 1.
Tensor morpho_clean(const Tensor& mask, int radius = 1);

}  // namespace cganseg
