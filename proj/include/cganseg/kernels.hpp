#pragma once

// OpenMP kernels behind the convolution and dense-layer ops.
//
// Every kernel partitions work over output elements that a single thread
// owns outright (an output plane, an input-gradient plane, a kernel slice),
// and each reduction runs in a fixed serial order inside its owner. Results
// are therefore bit-identical for any thread count.
//
// All kernels accumulate into their destination; callers zero it first when
// they want plain assignment.

#include <cstddef>
#include <span>

#include "cganseg/tensor.hpp"

namespace cganseg::kernels {

struct ConvGeometry {
  std::size_t batch = 0;
  std::size_t in_channels = 0;
  std::size_t in_h = 0, in_w = 0;
  std::size_t out_channels = 0;
  std::size_t kernel_h = 0, kernel_w = 0;
  std::size_t stride = 1;
  std::size_t padding = 0;
  std::size_t out_h = 0, out_w = 0;

  std::size_t in_size() const { return batch * in_channels * in_h * in_w; }
  std::size_t out_size() const { return batch * out_channels * out_h * out_w; }
  std::size_t kernel_size() const { return out_channels * in_channels * kernel_h * kernel_w; }
};

// Geometry of conv2d(input [N,C,H,W], kernel [F,C,kH,kW]). Throws ShapeError.
ConvGeometry conv2d_geometry(const Shape& input, const Shape& kernel, int stride, int padding);

// Geometry of conv2d_transpose(input [N,F,H,W], kernel [F,C,kH,kW]) expressed
// as the conv2d whose input-gradient it is: in_* describe the transpose
// output [N,C,H',W'] and out_* the transpose input.
ConvGeometry conv2d_transpose_geometry(const Shape& input, const Shape& kernel, int stride, int padding);

void conv2d_forward(const ConvGeometry& g, std::span<const double> input, std::span<const double> kernel,
                    std::span<double> output);
void conv2d_backward_input(const ConvGeometry& g, std::span<const double> grad_output,
                           std::span<const double> kernel, std::span<double> grad_input);
void conv2d_backward_kernel(const ConvGeometry& g, std::span<const double> input,
                            std::span<const double> grad_output, std::span<double> grad_kernel);

// Dense layer y[n,o] += sum_i w[o,i] x[n,i].
void linear_forward(std::size_t batch, std::size_t in_features, std::size_t out_features,
                    std::span<const double> x, std::span<const double> w, std::span<double> y);
void linear_backward_input(std::size_t batch, std::size_t in_features, std::size_t out_features,
                           std::span<const double> grad_y, std::span<const double> w, std::span<double> grad_x);
void linear_backward_weight(std::size_t batch, std::size_t in_features, std::size_t out_features,
                            std::span<const double> x, std::span<const double> grad_y, std::span<double> grad_w);

}  // namespace cganseg::kernels
