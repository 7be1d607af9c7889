#include "cganseg/metrics.hpp"

#include <string>

#include "cganseg/errors.hpp"

namespace cganseg {

ConfusionCounts confusion(const Tensor& pred, const Tensor& truth) {
  if (pred.shape() != truth.shape()) {
    throw ShapeError("prediction " + shape_to_string(pred.shape()) + " and truth " +
                     shape_to_string(truth.shape()) + " differ in shape");
  }
  auto p = pred.data();
  auto t = truth.data();
  ConfusionCounts c;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if ((p[i] != 0.0 && p[i] != 1.0) || (t[i] != 0.0 && t[i] != 1.0)) {
      throw InvalidArgument("confusion() needs strictly binary masks");
    }
    const bool positive = p[i] == 1.0;
    const bool actual = t[i] == 1.0;
    if (positive && actual) {
      ++c.tp;
    } else if (positive) {
      ++c.fp;
    } else if (actual) {
      ++c.fn;
    } else {
      ++c.tn;
    }
  }
  return c;
}

namespace {

double ratio(std::uint64_t num, std::uint64_t den, unsigned flag, unsigned& vacuous) {
  if (den == 0) {
    vacuous |= flag;
    return 1.0;
  }
  return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

SegMetrics metrics(const ConfusionCounts& c) {
  if (c.total() == 0) throw InvalidArgument("metrics() over zero pixels");
  SegMetrics m;
  m.accuracy = static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
  m.dice = ratio(2 * c.tp, 2 * c.tp + c.fp + c.fn, kVacuousDice, m.vacuous);
  m.jaccard = ratio(c.tp, c.tp + c.fp + c.fn, kVacuousJaccard, m.vacuous);
  m.sensitivity = ratio(c.tp, c.tp + c.fn, kVacuousSensitivity, m.vacuous);
  m.specificity = ratio(c.tn, c.tn + c.fp, kVacuousSpecificity, m.vacuous);
  return m;
}

SegMetrics evaluate_set(const std::vector<std::pair<Tensor, Tensor>>& pairs) {
  if (pairs.empty()) throw InvalidArgument("evaluate_set() needs at least one pair");
  ConfusionCounts pooled;
  for (const auto& [pred, truth] : pairs) pooled += confusion(pred, truth);
  return metrics(pooled);
}

SegMetrics macro_average(const std::vector<SegMetrics>& per_image) {
  if (per_image.empty()) throw InvalidArgument("macro_average() of nothing");
  SegMetrics avg;
  for (const SegMetrics& m : per_image) {
    avg.accuracy += m.accuracy;
    avg.dice += m.dice;
    avg.jaccard += m.jaccard;
    avg.sensitivity += m.sensitivity;
    avg.specificity += m.specificity;
    avg.vacuous |= m.vacuous;
  }
  const double n = static_cast<double>(per_image.size());
  avg.accuracy /= n;
  avg.dice /= n;
  avg.jaccard /= n;
  avg.sensitivity /= n;
  avg.specificity /= n;
  return avg;
}

}  // namespace cganseg
