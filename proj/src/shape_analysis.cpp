#include "cganseg/shape_analysis.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <iomanip>
#include <sstream>

#include "cganseg/autodiff.hpp"
#include "cganseg/errors.hpp"

namespace cganseg {

ShapeLabel shape_from_code(int c) {
  if (c < 0 || c >= kShapeClassCount) throw InvalidArgument("shape code " + std::to_string(c) + " out of range");
  return static_cast<ShapeLabel>(c);
}

std::string_view shape_name(ShapeLabel s) {
  switch (s) {
    case ShapeLabel::Irregular: return "irregular";
    case ShapeLabel::Lobular: return "lobular";
    case ShapeLabel::Oval: return "oval";
    case ShapeLabel::Round: return "round";
  }
  return "unknown";
}

std::string_view subtype_name(Subtype s) {
  switch (s) {
    case Subtype::LuminalA: return "LuminalA";
    case Subtype::LuminalB: return "LuminalB";
    case Subtype::Her2: return "Her2";
    case Subtype::BasalLike: return "BasalLike";
  }
  return "unknown";
}

namespace {

// Lower-cased with spaces, dashes and underscores removed.
std::string normalize(std::string_view text) {
  std::string out;
  for (char ch : text) {
    if (ch == ' ' || ch == '-' || ch == '_') continue;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
  }
  return out;
}

std::optional<int> parse_code(std::string_view text) {
  int value = 0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || end != text.data() + text.size() || value < 0 || value > 3) return std::nullopt;
  return value;
}

}  // namespace

std::optional<ShapeLabel> parse_shape(std::string_view text) {
  if (auto c = parse_code(text)) return static_cast<ShapeLabel>(*c);
  const std::string key = normalize(text);
  for (ShapeLabel s : kAllShapes) {
    if (key == shape_name(s)) return s;
  }
  return std::nullopt;
}

std::optional<Subtype> parse_subtype(std::string_view text) {
  if (auto c = parse_code(text)) return static_cast<Subtype>(*c);
  const std::string key = normalize(text);
  for (Subtype s : kAllSubtypes) {
    if (key == normalize(subtype_name(s))) return s;
  }
  return std::nullopt;
}

std::vector<ShapeLabel> argmax_labels(const Tensor& probs) {
  if (probs.rank() != 2 || probs.dim(1) != kShapeClassCount) {
    throw ShapeError("expected class scores [N,4], got " + shape_to_string(probs.shape()));
  }
  std::vector<ShapeLabel> labels;
  auto p = probs.data();
  for (std::size_t n = 0; n < probs.dim(0); ++n) {
    const double* row = p.data() + n * kShapeClassCount;
    // max_element returns the first maximum, i.e. the lowest code on ties.
    labels.push_back(static_cast<ShapeLabel>(std::max_element(row, row + kShapeClassCount) - row));
  }
  return labels;
}

std::vector<ShapeLabel> classify_shapes(const Weights& weights, const std::vector<Tensor>& masks) {
  if (masks.empty()) return {};
  const std::size_t side = static_cast<std::size_t>(weights.spec().input_resolution);
  std::vector<Tensor> planes;
  planes.reserve(masks.size());
  for (const Tensor& m : masks) {
    if (m.numel() != side * side) {
      throw ShapeError("mask " + shape_to_string(m.shape()) + " does not match classifier resolution " +
                       std::to_string(side));
    }
    planes.push_back(m.reshaped({1, side, side}));
  }
  Tape tape(Tape::Mode::Inference);
  return argmax_labels(shape_cnn_forward(tape, weights, stack(planes)));
}

ShapeAccuracy shape_accuracy(const std::vector<ShapeLabel>& predicted, const std::vector<ShapeLabel>& truth) {
  if (predicted.size() != truth.size()) throw InvalidArgument("predicted and true label lists differ in length");
  if (truth.empty()) throw InvalidArgument("shape_accuracy() of empty lists");
  ShapeAccuracy out;
  std::uint64_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    ++out.confusion[static_cast<std::size_t>(code(truth[i]))][static_cast<std::size_t>(code(predicted[i]))];
    if (truth[i] == predicted[i]) ++hits;
  }
  out.accuracy = static_cast<double>(hits) / static_cast<double>(truth.size());
  return out;
}

std::uint64_t ContingencyTable::grand_total() const {
  std::uint64_t n = 0;
  for (std::uint64_t t : row_totals) n += t;
  return n;
}

ContingencyTable contingency(const std::vector<std::pair<Subtype, ShapeLabel>>& pairs) {
  ContingencyTable table;
  for (const auto& [subtype, shape] : pairs) {
    ++table.cells[static_cast<std::size_t>(code(subtype))][static_cast<std::size_t>(code(shape))];
    ++table.row_totals[static_cast<std::size_t>(code(subtype))];
  }
  return table;
}

std::string contingency_csv(const ContingencyTable& table) {
  std::ostringstream out;
  out << "subtype";
  for (ShapeLabel s : kAllShapes) out << ',' << shape_name(s);
  out << ",total\n";
  for (Subtype t : kAllSubtypes) {
    const auto row = static_cast<std::size_t>(code(t));
    out << subtype_name(t);
    for (std::uint64_t cell : table.cells[row]) out << ',' << cell;
    out << ',' << table.row_totals[row] << '\n';
  }
  return out.str();
}

std::string contingency_text(const ContingencyTable& table) {
  std::ostringstream out;
  out << std::left << std::setw(10) << "subtype" << std::right;
  for (ShapeLabel s : kAllShapes) out << std::setw(11) << shape_name(s);
  out << std::setw(8) << "total" << '\n';
  for (Subtype t : kAllSubtypes) {
    const auto row = static_cast<std::size_t>(code(t));
    out << std::left << std::setw(10) << subtype_name(t) << std::right;
    for (std::uint64_t cell : table.cells[row]) out << std::setw(11) << cell;
    out << std::setw(8) << table.row_totals[row] << '\n';
  }
  return out.str();
}

}  // namespace cganseg
