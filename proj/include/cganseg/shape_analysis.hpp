#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "cganseg/labels.hpp"
#include "cganseg/nets.hpp"
#include "cganseg/tensor.hpp"

namespace cganseg {

// Index of the largest entry of each row of probs [N,4]; ties go to the
// lowest class code.
std::vector<ShapeLabel> argmax_labels(const Tensor& probs);

// Runs the shape CNN on each [1,R,R] (or [1,1,R,R]) binary mask.
std::vector<ShapeLabel> classify_shapes(const Weights& weights, const std::vector<Tensor>& masks);

using ClassMatrix = std::array<std::array<std::uint64_t, 4>, 4>;

struct ShapeAccuracy {
  double accuracy = 0.0;
  ClassMatrix confusion{};  // rows = truth, columns = predicted
};

ShapeAccuracy shape_accuracy(const std::vector<ShapeLabel>& predicted, const std::vector<ShapeLabel>& truth);

/// Subtype-by-shape counts. Rows follow Subtype order (LuminalA, LuminalB,
/// Her2, BasalLike), columns follow ShapeLabel order.
struct ContingencyTable {
  ClassMatrix cells{};
  std::array<std::uint64_t, 4> row_totals{};

  std::uint64_t grand_total() const;
};

ContingencyTable contingency(const std::vector<std::pair<Subtype, ShapeLabel>>& pairs);

// "subtype,irregular,lobular,oval,round,total" then one line per subtype.
std::string contingency_csv(const ContingencyTable& table);
// The same rows as right-aligned columns for reading in a terminal.
std::string contingency_text(const ContingencyTable& table);

}  // namespace cganseg
