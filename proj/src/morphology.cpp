#include <cstdint>

#include "cganseg/errors.hpp"
#include "cganseg/metrics.hpp"

namespace cganseg {
namespace {

struct PlaneGeometry {
  std::size_t planes, height, width;
};

PlaneGeometry plane_geometry(const Tensor& mask) {
  const Shape& s = mask.shape();
  if (s.size() < 2) throw ShapeError("morphology needs at least a 2-D mask, got " + shape_to_string(s));
  const std::size_t h = s[s.size() - 2];
  const std::size_t w = s[s.size() - 1];
  for (double v : mask.data()) {
    if (v != 0.0 && v != 1.0) throw InvalidArgument("morphology needs a strictly binary mask");
  }
  return {mask.numel() / (h * w), h, w};
}

// One 1-D pass of a square-element erosion or dilation, along rows or
// columns. The square is the composition of a row pass and a column pass.
void pass(const std::vector<double>& in, std::vector<double>& out, const PlaneGeometry& g, int radius,
          bool along_rows, bool erosion) {
  const std::int64_t lines = static_cast<std::int64_t>(g.planes * (along_rows ? g.height : g.width));
  const std::size_t length = along_rows ? g.width : g.height;
  const std::ptrdiff_t r = radius;
#pragma omp parallel for schedule(static)
  for (std::int64_t line = 0; line < lines; ++line) {
    const std::size_t plane = static_cast<std::size_t>(line) / (along_rows ? g.height : g.width);
    const std::size_t index = static_cast<std::size_t>(line) % (along_rows ? g.height : g.width);
    const std::size_t base = plane * g.height * g.width + (along_rows ? index * g.width : index);
    const std::size_t step = along_rows ? 1 : g.width;
    for (std::size_t i = 0; i < length; ++i) {
      bool result = erosion;
      for (std::ptrdiff_t k = -r; k <= r; ++k) {
        const std::ptrdiff_t j = static_cast<std::ptrdiff_t>(i) + k;
        const bool value = j >= 0 && j < static_cast<std::ptrdiff_t>(length) &&
                           in[base + static_cast<std::size_t>(j) * step] == 1.0;
        if (erosion && !value) {
          result = false;
          break;
        }
        if (!erosion && value) {
          result = true;
          break;
        }
      }
      out[base + i * step] = result ? 1.0 : 0.0;
    }
  }
}

Tensor apply(const Tensor& mask, int radius, bool erosion) {
  if (radius < 0) throw InvalidArgument("structuring element radius must be >= 0");
  const PlaneGeometry g = plane_geometry(mask);
  std::vector<double> a(mask.data().begin(), mask.data().end());
  if (radius == 0) return Tensor(mask.shape(), std::move(a));
  std::vector<double> b(a.size());
  pass(a, b, g, radius, true, erosion);
  pass(b, a, g, radius, false, erosion);
  return Tensor(mask.shape(), std::move(a));
}

}  // namespace

Tensor erode(const Tensor& mask, int radius) { return apply(mask, radius, true); }

Tensor dilate(const Tensor& mask, int radius) { return apply(mask, radius, false); }

Tensor morpho_clean(const Tensor& mask, int radius) {
  if (radius < 1) throw InvalidArgument("morpho_clean radius must be >= 1");
  return dilate(erode(mask, radius), radius);
}

}  // namespace cganseg
