#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>

#include "cganseg/dataset.hpp"
#include "cganseg/errors.hpp"
#include "cganseg/rng.hpp"

namespace cganseg {
namespace {

constexpr double kPi = std::numbers::pi;

// Outline as a closed polygon in pixel coordinates.
using Polygon = std::vector<std::pair<double, double>>;

bool inside_polygon(const Polygon& poly, double x, double y) {
  bool in = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const auto [xi, yi] = poly[i];
    const auto [xj, yj] = poly[j];
    if ((yi > y) != (yj > y) && x < (xj - xi) * (y - yi) / (yj - yi) + xi) in = !in;
  }
  return in;
}

Polygon radial_outline(double cx, double cy, std::size_t points, const auto& radius_at) {
  Polygon poly;
  poly.reserve(points);
  for (std::size_t k = 0; k < points; ++k) {
    const double angle = 2.0 * kPi * static_cast<double>(k) / static_cast<double>(points);
    const double r = radius_at(angle);
    poly.emplace_back(cx + r * std::cos(angle), cy + r * std::sin(angle));
  }
  return poly;
}

std::vector<double> render_mask(ShapeLabel label, int resolution, Rng& rng) {
  const double res = static_cast<double>(resolution);
  const double cx = res / 2.0 + rng.uniform(-0.05, 0.05) * res;
  const double cy = res / 2.0 + rng.uniform(-0.05, 0.05) * res;
  const double base = rng.uniform(0.34, 0.40) * res;

  std::function<bool(double, double)> inside;
  switch (label) {
    case ShapeLabel::Round: {
      inside = [=](double x, double y) { return std::hypot(x - cx, y - cy) <= base; };
      break;
    }
    case ShapeLabel::Oval: {
      const double major = base * rng.uniform(1.15, 1.30);
      const double minor = major * rng.uniform(0.45, 0.65);
      const double theta = rng.uniform(0.0, kPi);
      const double c = std::cos(theta);
      const double s = std::sin(theta);
      inside = [=](double x, double y) {
        const double u = (x - cx) * c + (y - cy) * s;
        const double v = -(x - cx) * s + (y - cy) * c;
        return (u * u) / (major * major) + (v * v) / (minor * minor) <= 1.0;
      };
      break;
    }
    case ShapeLabel::Lobular: {
      const int lobes = 3 + static_cast<int>(rng.index(3));
      const double amplitude = rng.uniform(0.20, 0.30);
      const double phase = rng.uniform(0.0, 2.0 * kPi);
      const Polygon outline = radial_outline(cx, cy, 256, [&](double a) {
        return base * (1.0 + amplitude * std::sin(lobes * a + phase));
      });
      inside = [outline](double x, double y) { return inside_polygon(outline, x, y); };
      break;
    }
    case ShapeLabel::Irregular: {
      const std::size_t vertices = 9 + rng.index(6);
      Polygon outline;
      const double offset = rng.uniform(0.0, 2.0 * kPi);
      for (std::size_t k = 0; k < vertices; ++k) {
        const double jitter = rng.uniform(-0.3, 0.3);
        const double angle = offset + 2.0 * kPi * (static_cast<double>(k) + jitter) / static_cast<double>(vertices);
        const double r = base * rng.uniform(0.45, 1.20);
        outline.emplace_back(cx + r * std::cos(angle), cy + r * std::sin(angle));
      }
      inside = [outline](double x, double y) { return inside_polygon(outline, x, y); };
      break;
    }
  }

  std::vector<double> mask(static_cast<std::size_t>(resolution * resolution), 0.0);
  for (int row = 0; row < resolution; ++row) {
    for (int col = 0; col < resolution; ++col) {
      if (inside(col + 0.5, row + 0.5)) mask[static_cast<std::size_t>(row * resolution + col)] = 1.0;
    }
  }
  return mask;
}

std::vector<double> render_image(const std::vector<double>& mask, int resolution, Rng& rng) {
  const double res = static_cast<double>(resolution);
  struct Wave {
    double fx, fy, phase, amplitude;
  };
  Wave waves[3];
  for (Wave& w : waves) {
    w.fx = rng.uniform(-3.0, 3.0) * 2.0 * kPi / res;
    w.fy = rng.uniform(-3.0, 3.0) * 2.0 * kPi / res;
    w.phase = rng.uniform(0.0, 2.0 * kPi);
    w.amplitude = rng.uniform(0.03, 0.07);
  }
  const double background = rng.uniform(0.22, 0.32);
  const double contrast = rng.uniform(0.30, 0.40);
  Image img{static_cast<std::size_t>(resolution), static_cast<std::size_t>(resolution),
            std::vector<double>(mask.size())};
  for (int row = 0; row < resolution; ++row) {
    for (int col = 0; col < resolution; ++col) {
      double texture = 0.0;
      for (const Wave& w : waves) texture += w.amplitude * std::sin(w.fx * col + w.fy * row + w.phase);
      const std::size_t i = static_cast<std::size_t>(row * resolution + col);
      img.values[i] = background + texture + contrast * mask[i] + rng.normal(0.0, 0.04);
    }
  }
  img = gaussian_smooth(img, 1.0, 3);
  for (double& v : img.values) v = std::clamp(v, 0.0, 1.0);
  return img.values;
}

}  // namespace

std::vector<SamplePair> synth_generate(int count, std::uint64_t seed, int resolution) {
  if (count <= 0) throw InvalidArgument("synthetic sample count must be positive");
  if (resolution < 8) throw InvalidArgument("synthetic resolution must be at least 8");
  std::vector<SamplePair> samples;
  samples.reserve(static_cast<std::size_t>(count));
  const std::size_t r = static_cast<std::size_t>(resolution);
  for (int i = 0; i < count; ++i) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    const ShapeLabel label = shape_from_code(i % kShapeClassCount);
    std::vector<double> mask = render_mask(label, resolution, rng);
    std::vector<double> image = render_image(mask, resolution, rng);
    char id[32];
    std::snprintf(id, sizeof id, "synth_%05d", i);
    SamplePair s;
    s.id = id;
    s.shape_label = label;
    s.image = Tensor({1, r, r}, std::move(image));
    s.mask = Tensor({1, r, r}, std::move(mask));
    samples.push_back(std::move(s));
  }
  return samples;
}

}  // namespace cganseg
