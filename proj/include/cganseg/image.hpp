#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "cganseg/tensor.hpp"

namespace cganseg {

// Integer grayscale raster as read from disk. maxval is 255 for 8-bit and up
// to 65535 for 16-bit data.
struct Raster {
  std::size_t width = 0;
  std::size_t height = 0;
  std::uint32_t maxval = 255;
  std::vector<std::uint16_t> pixels;  // row-major

  std::uint16_t at(std::size_t row, std::size_t col) const { return pixels[row * width + col]; }
};

// Real-valued single-channel image, row-major.
struct Image {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<double> values;

  double at(std::size_t row, std::size_t col) const { return values[row * width + col]; }
};

// Binary PGM (P5). 8-bit when maxval < 256, otherwise 16-bit big-endian.
Raster read_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const Raster& raster);

// Bilinear resampling with pixel-centre alignment:
//   src = (dst + 0.5) * (in_extent / out_extent) - 0.5, clamped to the edge.
Image resize_bilinear(const Image& in, std::size_t out_width, std::size_t out_height);

constexpr double kSmoothingSigma = 0.5;
constexpr int kSmoothingRadius = 2;

// Normalized 1-D Gaussian taps of length 2*radius+1.
std::vector<double> gaussian_taps(double sigma, int radius);

// Separable Gaussian filter with symmetric border reflection
// (... c b a | a b c ...). Rows are processed in parallel.
Image gaussian_smooth(const Image& in, double sigma = kSmoothingSigma, int radius = kSmoothingRadius);

Image to_image(const Raster& raster);

// [1,H,W] or [N,1,H,W] with N = 1, values in [0,1] -> raster scaled by maxval.
Raster tensor_to_raster(const Tensor& t, std::uint32_t maxval = 255);

}  // namespace cganseg
