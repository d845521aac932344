#pragma once

// Raw convolution kernels on contiguous channels-first buffers.
//
// Two implementations share one signature set:
//   dsp::kernels             im2col + GEMM, OpenMP-parallel over channels
//   dsp::kernels::reference  direct nested loops, serial
// The reference path is kept for tests and benchmarks; autodiff ops use the
// parallel path.

#include <cstddef>
#include <span>

namespace dsp::kernels {

struct ConvGeometry {
  std::size_t in_channels = 1;
  std::size_t out_channels = 1;
  std::size_t height = 1;
  std::size_t width = 1;
  std::size_t kernel = 1;
  std::size_t stride = 1;
  std::size_t padding = 0;

  std::size_t out_height() const { return (height + 2 * padding - kernel) / stride + 1; }
  std::size_t out_width() const { return (width + 2 * padding - kernel) / stride + 1; }
  std::size_t input_size() const { return in_channels * height * width; }
  std::size_t weight_size() const { return out_channels * in_channels * kernel * kernel; }
  std::size_t output_size() const { return out_channels * out_height() * out_width(); }
};

/// Throws ShapeError when the kernel does not fit the padded input.
void validate(const ConvGeometry& g);

/// out = cross_correlate(in, weight) + bias. Overwrites out.
template <typename T>
void conv2d_forward(const ConvGeometry& g, std::span<const T> in,
                    std::span<const T> weight, std::span<const T> bias,
                    std::span<T> out);

/// Accumulates gradients w.r.t. input, weight and bias. An empty grad_in
/// skips the input gradient.
template <typename T>
void conv2d_backward(const ConvGeometry& g, std::span<const T> in,
                     std::span<const T> weight, std::span<const T> grad_out,
                     std::span<T> grad_in, std::span<T> grad_weight,
                     std::span<T> grad_bias);

/// Nearest-neighbour 2x upsampling of a C x H x W buffer.
template <typename T>
void upsample2x_forward(std::size_t channels, std::size_t height, std::size_t width,
                        std::span<const T> in, std::span<T> out);

/// Sums each 2x2 block of grad_out into grad_in (accumulating).
template <typename T>
void upsample2x_backward(std::size_t channels, std::size_t height, std::size_t width,
                         std::span<const T> grad_out, std::span<T> grad_in);

namespace reference {

template <typename T>
void conv2d_forward(const ConvGeometry& g, std::span<const T> in,
                    std::span<const T> weight, std::span<const T> bias,
                    std::span<T> out);

template <typename T>
void conv2d_backward(const ConvGeometry& g, std::span<const T> in,
                     std::span<const T> weight, std::span<const T> grad_out,
                     std::span<T> grad_in, std::span<T> grad_weight,
                     std::span<T> grad_bias);

template <typename T>
void upsample2x_forward(std::size_t channels, std::size_t height, std::size_t width,
                        std::span<const T> in, std::span<T> out);

template <typename T>
void upsample2x_backward(std::size_t channels, std::size_t height, std::size_t width,
                         std::span<const T> grad_out, std::span<T> grad_in);

}  // namespace reference

}  // namespace dsp::kernels
