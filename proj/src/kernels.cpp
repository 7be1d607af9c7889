#include "cganseg/kernels.hpp"

#include <algorithm>
#include <cstdint>
#include <string>

#include "cganseg/errors.hpp"

namespace cganseg::kernels {
namespace {

using Index = std::int64_t;

// Output positions o in [0, out_extent) whose input index o*stride - pad + k
// falls inside [0, in_extent).
struct Range {
  std::size_t begin;
  std::size_t end;
};

Range valid_outputs(std::size_t in_extent, std::size_t out_extent, std::size_t stride, std::size_t pad,
                    std::size_t k) {
  const Index s = static_cast<Index>(stride);
  const Index offset = static_cast<Index>(k) - static_cast<Index>(pad);
  // Smallest o with o*s + offset >= 0.
  Index lo = offset >= 0 ? 0 : (-offset + s - 1) / s;
  // Largest o with o*s + offset <= in_extent - 1.
  Index last = static_cast<Index>(in_extent) - 1 - offset;
  Index hi = last < 0 ? 0 : last / s + 1;
  hi = std::min<Index>(hi, static_cast<Index>(out_extent));
  lo = std::min(lo, hi);
  return {static_cast<std::size_t>(lo), static_cast<std::size_t>(hi)};
}

void check_sizes(const ConvGeometry& g, std::size_t in, std::size_t kernel, std::size_t out) {
  if (in != g.in_size() || kernel != g.kernel_size() || out != g.out_size()) {
    throw ShapeError("convolution buffer sizes do not match geometry");
  }
}

}  // namespace

ConvGeometry conv2d_geometry(const Shape& input, const Shape& kernel, int stride, int padding) {
  if (input.size() != 4 || kernel.size() != 4) {
    throw ShapeError("conv2d expects rank-4 input and kernel, got " + shape_to_string(input) + " and " +
                     shape_to_string(kernel));
  }
  if (stride < 1) throw InvalidArgument("conv2d stride must be >= 1");
  if (padding < 0) throw InvalidArgument("conv2d padding must be >= 0");
  if (kernel[1] != input[1]) {
    throw ShapeError("conv2d kernel expects " + std::to_string(kernel[1]) + " input channels, input has " +
                     std::to_string(input[1]));
  }
  ConvGeometry g;
  g.batch = input[0];
  g.in_channels = input[1];
  g.in_h = input[2];
  g.in_w = input[3];
  g.out_channels = kernel[0];
  g.kernel_h = kernel[2];
  g.kernel_w = kernel[3];
  g.stride = static_cast<std::size_t>(stride);
  g.padding = static_cast<std::size_t>(padding);
  const std::size_t padded_h = g.in_h + 2 * g.padding;
  const std::size_t padded_w = g.in_w + 2 * g.padding;
  if (g.kernel_h > padded_h || g.kernel_w > padded_w) {
    throw ShapeError("conv2d kernel " + shape_to_string(kernel) + " larger than padded input " +
                     shape_to_string(input));
  }
  g.out_h = (padded_h - g.kernel_h) / g.stride + 1;
  g.out_w = (padded_w - g.kernel_w) / g.stride + 1;
  return g;
}

ConvGeometry conv2d_transpose_geometry(const Shape& input, const Shape& kernel, int stride, int padding) {
  if (input.size() != 4 || kernel.size() != 4) {
    throw ShapeError("conv2d_transpose expects rank-4 input and kernel, got " + shape_to_string(input) +
                     " and " + shape_to_string(kernel));
  }
  if (stride < 1) throw InvalidArgument("conv2d_transpose stride must be >= 1");
  if (padding < 0) throw InvalidArgument("conv2d_transpose padding must be >= 0");
  if (kernel[0] != input[1]) {
    throw ShapeError("conv2d_transpose kernel expects " + std::to_string(kernel[0]) +
                     " input channels, input has " + std::to_string(input[1]));
  }
  const auto extent = [&](std::size_t in, std::size_t k) {
    const Index e = (static_cast<Index>(in) - 1) * stride - 2 * static_cast<Index>(padding) + static_cast<Index>(k);
    if (e <= 0) throw ShapeError("conv2d_transpose output extent would be non-positive");
    return static_cast<std::size_t>(e);
  };
  ConvGeometry g;
  g.batch = input[0];
  g.out_channels = input[1];
  g.out_h = input[2];
  g.out_w = input[3];
  g.in_channels = kernel[1];
  g.kernel_h = kernel[2];
  g.kernel_w = kernel[3];
  g.stride = static_cast<std::size_t>(stride);
  g.padding = static_cast<std::size_t>(padding);
  g.in_h = extent(g.out_h, g.kernel_h);
  g.in_w = extent(g.out_w, g.kernel_w);
  return g;
}

void conv2d_forward(const ConvGeometry& g, std::span<const double> input, std::span<const double> kernel,
                    std::span<double> output) {
  check_sizes(g, input.size(), kernel.size(), output.size());
  const Index planes = static_cast<Index>(g.batch * g.out_channels);
  const std::size_t in_plane = g.in_h * g.in_w;
  const std::size_t out_plane = g.out_h * g.out_w;
#pragma omp parallel for schedule(static)
  for (Index plane = 0; plane < planes; ++plane) {
    const std::size_t n = static_cast<std::size_t>(plane) / g.out_channels;
    const std::size_t f = static_cast<std::size_t>(plane) % g.out_channels;
    double* out = output.data() + static_cast<std::size_t>(plane) * out_plane;
    for (std::size_t c = 0; c < g.in_channels; ++c) {
      const double* in = input.data() + (n * g.in_channels + c) * in_plane;
      const double* k = kernel.data() + (f * g.in_channels + c) * g.kernel_h * g.kernel_w;
      for (std::size_t ki = 0; ki < g.kernel_h; ++ki) {
        const Range rows = valid_outputs(g.in_h, g.out_h, g.stride, g.padding, ki);
        for (std::size_t kj = 0; kj < g.kernel_w; ++kj) {
          const Range cols = valid_outputs(g.in_w, g.out_w, g.stride, g.padding, kj);
          const double w = k[ki * g.kernel_w + kj];
          for (std::size_t oh = rows.begin; oh < rows.end; ++oh) {
            const double* in_row = in + (oh * g.stride + ki - g.padding) * g.in_w;
            double* out_row = out + oh * g.out_w;
            for (std::size_t ow = cols.begin; ow < cols.end; ++ow) {
              out_row[ow] += w * in_row[ow * g.stride + kj - g.padding];
            }
          }
        }
      }
    }
  }
}

void conv2d_backward_input(const ConvGeometry& g, std::span<const double> grad_output,
                           std::span<const double> kernel, std::span<double> grad_input) {
  check_sizes(g, grad_input.size(), kernel.size(), grad_output.size());
  const Index planes = static_cast<Index>(g.batch * g.in_channels);
  const std::size_t in_plane = g.in_h * g.in_w;
  const std::size_t out_plane = g.out_h * g.out_w;
#pragma omp parallel for schedule(static)
  for (Index plane = 0; plane < planes; ++plane) {
    const std::size_t n = static_cast<std::size_t>(plane) / g.in_channels;
    const std::size_t c = static_cast<std::size_t>(plane) % g.in_channels;
    double* gin = grad_input.data() + static_cast<std::size_t>(plane) * in_plane;
    for (std::size_t f = 0; f < g.out_channels; ++f) {
      const double* gout = grad_output.data() + (n * g.out_channels + f) * out_plane;
      const double* k = kernel.data() + (f * g.in_channels + c) * g.kernel_h * g.kernel_w;
      for (std::size_t ki = 0; ki < g.kernel_h; ++ki) {
        const Range rows = valid_outputs(g.in_h, g.out_h, g.stride, g.padding, ki);
        for (std::size_t kj = 0; kj < g.kernel_w; ++kj) {
          const Range cols = valid_outputs(g.in_w, g.out_w, g.stride, g.padding, kj);
          const double w = k[ki * g.kernel_w + kj];
          for (std::size_t oh = rows.begin; oh < rows.end; ++oh) {
            double* gin_row = gin + (oh * g.stride + ki - g.padding) * g.in_w;
            const double* gout_row = gout + oh * g.out_w;
            for (std::size_t ow = cols.begin; ow < cols.end; ++ow) {
              gin_row[ow * g.stride + kj - g.padding] += w * gout_row[ow];
            }
          }
        }
      }
    }
  }
}

void conv2d_backward_kernel(const ConvGeometry& g, std::span<const double> input,
                            std::span<const double> grad_output, std::span<double> grad_kernel) {
  check_sizes(g, input.size(), grad_kernel.size(), grad_output.size());
  const Index slices = static_cast<Index>(g.out_channels * g.in_channels);
  const std::size_t in_plane = g.in_h * g.in_w;
  const std::size_t out_plane = g.out_h * g.out_w;
#pragma omp parallel for schedule(static)
  for (Index slice = 0; slice < slices; ++slice) {
    const std::size_t f = static_cast<std::size_t>(slice) / g.in_channels;
    const std::size_t c = static_cast<std::size_t>(slice) % g.in_channels;
    double* gk = grad_kernel.data() + static_cast<std::size_t>(slice) * g.kernel_h * g.kernel_w;
    for (std::size_t ki = 0; ki < g.kernel_h; ++ki) {
      const Range rows = valid_outputs(g.in_h, g.out_h, g.stride, g.padding, ki);
      for (std::size_t kj = 0; kj < g.kernel_w; ++kj) {
        const Range cols = valid_outputs(g.in_w, g.out_w, g.stride, g.padding, kj);
        double acc = 0.0;
        for (std::size_t n = 0; n < g.batch; ++n) {
          const double* in = input.data() + (n * g.in_channels + c) * in_plane;
          const double* gout = grad_output.data() + (n * g.out_channels + f) * out_plane;
          for (std::size_t oh = rows.begin; oh < rows.end; ++oh) {
            const double* in_row = in + (oh * g.stride + ki - g.padding) * g.in_w;
            const double* gout_row = gout + oh * g.out_w;
            for (std::size_t ow = cols.begin; ow < cols.end; ++ow) {
              acc += gout_row[ow] * in_row[ow * g.stride + kj - g.padding];
            }
          }
        }
        gk[ki * g.kernel_w + kj] += acc;
      }
    }
  }
}

void linear_forward(std::size_t batch, std::size_t in_features, std::size_t out_features,
                    std::span<const double> x, std::span<const double> w, std::span<double> y) {
  if (x.size() != batch * in_features || w.size() != out_features * in_features ||
      y.size() != batch * out_features) {
    throw ShapeError("linear buffer sizes do not match");
  }
  const Index rows = static_cast<Index>(batch * out_features);
#pragma omp parallel for schedule(static)
  for (Index r = 0; r < rows; ++r) {
    const std::size_t n = static_cast<std::size_t>(r) / out_features;
    const std::size_t o = static_cast<std::size_t>(r) % out_features;
    const double* xr = x.data() + n * in_features;
    const double* wr = w.data() + o * in_features;
    double acc = 0.0;
    for (std::size_t i = 0; i < in_features; ++i) acc += wr[i] * xr[i];
    y[static_cast<std::size_t>(r)] += acc;
  }
}

void linear_backward_input(std::size_t batch, std::size_t in_features, std::size_t out_features,
                           std::span<const double> grad_y, std::span<const double> w,
                           std::span<double> grad_x) {
  if (grad_x.size() != batch * in_features || w.size() != out_features * in_features ||
      grad_y.size() != batch * out_features) {
    throw ShapeError("linear buffer sizes do not match");
  }
  const Index rows = static_cast<Index>(batch);
#pragma omp parallel for schedule(static)
  for (Index n = 0; n < rows; ++n) {
    double* gx = grad_x.data() + static_cast<std::size_t>(n) * in_features;
    const double* gy = grad_y.data() + static_cast<std::size_t>(n) * out_features;
    for (std::size_t o = 0; o < out_features; ++o) {
      const double scale = gy[o];
      const double* wr = w.data() + o * in_features;
      for (std::size_t i = 0; i < in_features; ++i) gx[i] += scale * wr[i];
    }
  }
}

void linear_backward_weight(std::size_t batch, std::size_t in_features, std::size_t out_features,
                            std::span<const double> x, std::span<const double> grad_y,
                            std::span<double> grad_w) {
  if (x.size() != batch * in_features || grad_w.size() != out_features * in_features ||
      grad_y.size() != batch * out_features) {
    throw ShapeError("linear buffer sizes do not match");
  }
  const Index rows = static_cast<Index>(out_features);
#pragma omp parallel for schedule(static)
  for (Index o = 0; o < rows; ++o) {
    double* gw = grad_w.data() + static_cast<std::size_t>(o) * in_features;
    for (std::size_t n = 0; n < batch; ++n) {
      const double scale = grad_y[n * out_features + static_cast<std::size_t>(o)];
      const double* xr = x.data() + n * in_features;
      for (std::size_t i = 0; i < in_features; ++i) gw[i] += scale * xr[i];
    }
  }
}

}  // namespace cganseg::kernels
