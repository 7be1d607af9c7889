#pragma once
// Oracles and fixtures shared by the unit tests and the acceptance runner.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <string>
#include <vector>

#include "cganseg/autodiff.hpp"
#include "cganseg/metrics.hpp"
#include "cganseg/rng.hpp"
#include "cganseg/tensor.hpp"

namespace cganseg::testing {

inline Tensor random_tensor(Rng& rng, Shape shape, double lo = -1.0, double hi = 1.0, bool requires_grad = false) {
  Tensor t(std::move(shape), requires_grad);
  for (double& v : t.data_mut()) v = rng.uniform(lo, hi);
  return t;
}

// Uniform values whose magnitude stays at least `gap` away from zero, so that
// kinked ops (relu, abs) are differentiable at every sample point.
inline Tensor random_away_from_zero(Rng& rng, Shape shape, double gap = 0.1, bool requires_grad = false) {
  Tensor t(std::move(shape), requires_grad);
  for (double& v : t.data_mut()) {
    const double magnitude = rng.uniform(gap, 1.0);
    v = rng.bernoulli(0.5) ? magnitude : -magnitude;
  }
  return t;
}

inline Tensor random_mask(Rng& rng, Shape shape, double p = 0.5) {
  Tensor t(std::move(shape));
  for (double& v : t.data_mut()) v = rng.bernoulli(p) ? 1.0 : 0.0;
  return t;
}

inline double dot(const Tensor& a, const Tensor& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.numel(); ++i) acc += a.at(i) * b.at(i);
  return acc;
}

inline double max_abs_diff(const Tensor& a, const Tensor& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.numel(); ++i) worst = std::max(worst, std::fabs(a.at(i) - b.at(i)));
  return worst;
}

struct GradCheck {
  double max_relative_error = 0.0;
  std::size_t checked = 0;
};

// Central differences with step h against reverse-mode gradients of the
// scalar `loss` with respect to every element of every tensor in `wrt`.
// Per tensor the error is max|analytic - numeric| / max(max|numeric|, 1e-8);
// the worst tensor is reported.
inline GradCheck check_gradients(const std::vector<Tensor>& wrt, const std::function<Tensor(Tape&)>& loss,
                                 double h = 1e-5) {
  for (Tensor t : wrt) t.zero_grad();
  {
    Tape tape;
    tape.backward(loss(tape));
  }
  GradCheck result;
  for (Tensor t : wrt) {
    const std::vector<double> analytic(t.grad().begin(), t.grad().end());
    double scale = 0.0;
    double error = 0.0;
    auto values = t.data_mut();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double original = values[i];
      values[i] = original + h;
      Tape up(Tape::Mode::Inference);
      const double plus = loss(up).item();
      values[i] = original - h;
      Tape down(Tape::Mode::Inference);
      const double minus = loss(down).item();
      values[i] = original;
      const double numeric = (plus - minus) / (2.0 * h);
      scale = std::max(scale, std::fabs(numeric));
      error = std::max(error, std::fabs(numeric - analytic[i]));
      ++result.checked;
    }
    result.max_relative_error = std::max(result.max_relative_error, error / std::max(scale, 1e-8));
  }
  return result;
}

// Per-pixel tally written as plainly as possible.
inline ConfusionCounts pixel_loop_confusion(const Tensor& pred, const Tensor& truth) {
  ConfusionCounts c;
  for (std::size_t i = 0; i < pred.numel(); ++i) {
    const bool p = pred.at(i) == 1.0;
    const bool t = truth.at(i) == 1.0;
    if (p && t) ++c.tp;
    if (p && !t) ++c.fp;
    if (!p && t) ++c.fn;
    if (!p && !t) ++c.tn;
  }
  return c;
}

// 4πA/P² of a binary h×w mask. The perimeter follows the weighted
// boundary-pixel estimator of Benkrid & Crookes: boundary pixels (foreground
// with a background 4-neighbour or on the image edge) are classified by their
// 8-neighbourhood and weighted 1, √2 or (1+√2)/2.
inline double isoperimetric_ratio(const Tensor& mask, std::size_t h, std::size_t w) {
  auto at = [&](long r, long c) -> int {
    if (r < 0 || c < 0 || r >= static_cast<long>(h) || c >= static_cast<long>(w)) return 0;
    return mask.at(static_cast<std::size_t>(r) * w + static_cast<std::size_t>(c)) > 0.5 ? 1 : 0;
  };
  std::vector<int> border(h * w, 0);
  double area = 0.0;
  for (long r = 0; r < static_cast<long>(h); ++r) {
    for (long c = 0; c < static_cast<long>(w); ++c) {
      if (!at(r, c)) continue;
      area += 1.0;
      const bool interior = at(r - 1, c) && at(r + 1, c) && at(r, c - 1) && at(r, c + 1);
      border[static_cast<std::size_t>(r) * w + static_cast<std::size_t>(c)] = interior ? 0 : 1;
    }
  }
  auto b = [&](long r, long c) -> int {
    if (r < 0 || c < 0 || r >= static_cast<long>(h) || c >= static_cast<long>(w)) return 0;
    return border[static_cast<std::size_t>(r) * w + static_cast<std::size_t>(c)];
  };
  const double root2 = std::sqrt(2.0);
  const std::map<int, double> weight = {{5, 1.0},   {7, 1.0},   {15, 1.0},  {17, 1.0},
                                        {25, 1.0},  {27, 1.0},  {21, root2}, {33, root2},
                                        {13, (1.0 + root2) / 2.0}, {23, (1.0 + root2) / 2.0}};
  double perimeter = 0.0;
  for (long r = 0; r < static_cast<long>(h); ++r) {
    for (long c = 0; c < static_cast<long>(w); ++c) {
      if (!b(r, c)) continue;
      const int code = b(r, c) + 2 * (b(r - 1, c) + b(r + 1, c) + b(r, c - 1) + b(r, c + 1)) +
                       10 * (b(r - 1, c - 1) + b(r - 1, c + 1) + b(r + 1, c - 1) + b(r + 1, c + 1));
      auto it = weight.find(code);
      if (it != weight.end()) perimeter += it->second;
    }
  }
  return 4.0 * 3.14159265358979323846 * area / (perimeter * perimeter);
}

// Fresh, empty scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("cganseg_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_bytes(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << bytes;
}

// Relative path -> contents for every regular file below `root`.
inline std::map<std::string, std::string> snapshot(const std::filesystem::path& root) {
  std::map<std::string, std::string> files;
  if (std::filesystem::is_regular_file(root)) {
    files[root.filename().string()] = read_bytes(root);
    return files;
  }
  for (const auto& entry : std::filesystem::recursive_directory_iterator(root)) {
    if (entry.is_regular_file()) {
      files[std::filesystem::relative(entry.path(), root).string()] = read_bytes(entry.path());
    }
  }
  return files;
}

}  // namespace cganseg::testing
