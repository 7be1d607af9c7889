#include "cganseg/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <string>

#include "cganseg/errors.hpp"

namespace cganseg {
namespace {

class PgmHeaderParser {
 public:
  PgmHeaderParser(const std::vector<unsigned char>& bytes, std::string origin)
      : bytes_(bytes), origin_(std::move(origin)) {}

  std::uint32_t number() {
    skip_space_and_comments();
    if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_])) fail("expected a number in header");
    std::uint64_t v = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      v = v * 10 + (bytes_[pos_++] - '0');
      if (v > 0xffffffffu) fail("header value too large");
    }
    return static_cast<std::uint32_t>(v);
  }

  // Exactly one whitespace byte separates the header from the pixel data.
  std::size_t data_offset() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) fail("missing separator after header");
    return pos_ + 1;
  }

  [[noreturn]] void fail(const std::string& why) const { throw FormatError(origin_ + ": " + why); }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  const std::vector<unsigned char>& bytes_;
  std::string origin_;
  std::size_t pos_ = 2;
};

std::size_t reflect(std::ptrdiff_t i, std::size_t n) {
  const std::ptrdiff_t period = 2 * static_cast<std::ptrdiff_t>(n);
  std::ptrdiff_t m = i % period;
  if (m < 0) m += period;
  return static_cast<std::size_t>(m < static_cast<std::ptrdiff_t>(n) ? m : period - 1 - m);
}

}  // namespace

Raster read_pgm(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw IoError("cannot open raster " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(file)), std::istreambuf_iterator<char>());
  PgmHeaderParser header(bytes, path.string());
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') header.fail("not a binary PGM (P5)");
  Raster r;
  r.width = header.number();
  r.height = header.number();
  r.maxval = header.number();
  if (r.width == 0 || r.height == 0) header.fail("zero-extent image");
  if (r.maxval == 0 || r.maxval > 65535) header.fail("maxval out of range");
  const std::size_t offset = header.data_offset();
  const std::size_t count = r.width * r.height;
  const std::size_t bytes_per_pixel = r.maxval < 256 ? 1 : 2;
  if (bytes.size() - offset < count * bytes_per_pixel) header.fail("pixel data is truncated");
  r.pixels.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint16_t v = 0;
    if (bytes_per_pixel == 1) {
      v = bytes[offset + i];
    } else {
      v = static_cast<std::uint16_t>((bytes[offset + 2 * i] << 8) | bytes[offset + 2 * i + 1]);
    }
    if (v > r.maxval) header.fail("pixel value exceeds maxval");
    r.pixels[i] = v;
  }
  return r;
}

void write_pgm(const std::filesystem::path& path, const Raster& raster) {
  if (raster.width == 0 || raster.height == 0 || raster.pixels.size() != raster.width * raster.height) {
    throw InvalidArgument("cannot write an empty or inconsistent raster");
  }
  if (raster.maxval == 0 || raster.maxval > 65535) throw InvalidArgument("raster maxval out of range");
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw IoError("cannot write raster " + path.string());
  file << "P5\n" << raster.width << ' ' << raster.height << '\n' << raster.maxval << '\n';
  std::vector<unsigned char> data;
  const bool wide = raster.maxval >= 256;
  data.reserve(raster.pixels.size() * (wide ? 2 : 1));
  for (std::uint16_t v : raster.pixels) {
    if (wide) data.push_back(static_cast<unsigned char>(v >> 8));
    data.push_back(static_cast<unsigned char>(v & 0xff));
  }
  file.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (!file) throw IoError("failed writing raster " + path.string());
}

Image resize_bilinear(const Image& in, std::size_t out_width, std::size_t out_height) {
  if (in.width == 0 || in.height == 0 || out_width == 0 || out_height == 0) {
    throw InvalidArgument("resize of a zero-extent image");
  }
  Image out{out_width, out_height, std::vector<double>(out_width * out_height)};
  const double sx = static_cast<double>(in.width) / static_cast<double>(out_width);
  const double sy = static_cast<double>(in.height) / static_cast<double>(out_height);
  const auto source = [](std::size_t dst, double ratio, std::size_t extent) {
    const double s = (static_cast<double>(dst) + 0.5) * ratio - 0.5;
    return std::clamp(s, 0.0, static_cast<double>(extent - 1));
  };
  const std::int64_t rows = static_cast<std::int64_t>(out_height);
#pragma omp parallel for schedule(static)
  for (std::int64_t row = 0; row < rows; ++row) {
    const double y = source(static_cast<std::size_t>(row), sy, in.height);
    const std::size_t y0 = static_cast<std::size_t>(y);
    const std::size_t y1 = std::min(y0 + 1, in.height - 1);
    const double fy = y - static_cast<double>(y0);
    for (std::size_t col = 0; col < out_width; ++col) {
      const double x = source(col, sx, in.width);
      const std::size_t x0 = static_cast<std::size_t>(x);
      const std::size_t x1 = std::min(x0 + 1, in.width - 1);
      const double fx = x - static_cast<double>(x0);
      const double top = (1.0 - fx) * in.at(y0, x0) + fx * in.at(y0, x1);
      const double bottom = (1.0 - fx) * in.at(y1, x0) + fx * in.at(y1, x1);
      out.values[static_cast<std::size_t>(row) * out_width + col] = (1.0 - fy) * top + fy * bottom;
    }
  }
  return out;
}

std::vector<double> gaussian_taps(double sigma, int radius) {
  if (!(sigma > 0.0) || radius < 0) throw InvalidArgument("gaussian needs sigma > 0 and radius >= 0");
  std::vector<double> taps(static_cast<std::size_t>(2 * radius + 1));
  double total = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double w = std::exp(-static_cast<double>(i * i) / (2.0 * sigma * sigma));
    taps[static_cast<std::size_t>(i + radius)] = w;
    total += w;
  }
  for (double& w : taps) w /= total;
  return taps;
}

Image gaussian_smooth(const Image& in, double sigma, int radius) {
  const std::vector<double> taps = gaussian_taps(sigma, radius);
  const std::size_t w = in.width;
  const std::size_t h = in.height;
  Image horizontal{w, h, std::vector<double>(w * h)};
  const std::int64_t rows = static_cast<std::int64_t>(h);
#pragma omp parallel for schedule(static)
  for (std::int64_t r = 0; r < rows; ++r) {
    const std::size_t row = static_cast<std::size_t>(r);
    for (std::size_t col = 0; col < w; ++col) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k) {
        acc += taps[static_cast<std::size_t>(k + radius)] *
               in.at(row, reflect(static_cast<std::ptrdiff_t>(col) + k, w));
      }
      horizontal.values[row * w + col] = acc;
    }
  }
  Image out{w, h, std::vector<double>(w * h)};
#pragma omp parallel for schedule(static)
  for (std::int64_t r = 0; r < rows; ++r) {
    const std::size_t row = static_cast<std::size_t>(r);
    for (std::size_t col = 0; col < w; ++col) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k) {
        acc += taps[static_cast<std::size_t>(k + radius)] *
               horizontal.at(reflect(static_cast<std::ptrdiff_t>(row) + k, h), col);
      }
      out.values[row * w + col] = acc;
    }
  }
  return out;
}

Image to_image(const Raster& raster) {
  Image img{raster.width, raster.height, std::vector<double>(raster.pixels.size())};
  std::transform(raster.pixels.begin(), raster.pixels.end(), img.values.begin(),
                 [](std::uint16_t v) { return static_cast<double>(v); });
  return img;
}

Raster tensor_to_raster(const Tensor& t, std::uint32_t maxval) {
  const Shape& s = t.shape();
  const bool single = (s.size() == 3 && s[0] == 1) || (s.size() == 4 && s[0] == 1 && s[1] == 1);
  if (!single) throw ShapeError("expected a single-channel image tensor, got " + shape_to_string(s));
  Raster r;
  r.height = s[s.size() - 2];
  r.width = s[s.size() - 1];
  r.maxval = maxval;
  r.pixels.resize(t.numel());
  auto d = t.data();
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double v = std::clamp(d[i], 0.0, 1.0);
    r.pixels[i] = static_cast<std::uint16_t>(std::lround(v * maxval));
  }
  return r;
}

}  // namespace cganseg
