#include <Eigen/Core>

#include <vector>

#include "dsp/kernels.hpp"

namespace dsp::kernels {
namespace {

template <typename T>
using RowMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatrixMap = Eigen::Map<RowMatrix<T>>;
template <typename T>
using ConstMatrixMap = Eigen::Map<const RowMatrix<T>>;

bool is_pointwise(const ConvGeometry& g) {
  return g.kernel == 1 && g.stride == 1 && g.padding == 0;
}

template <typename T>
std::vector<T>& scratch() {
  thread_local std::vector<T> buffer;
  return buffer;
}

// Unfolds the input into a (C*k*k) x (OH*OW) matrix; one row per
// (channel, ky, kx) tap.
template <typename T>
void im2col(const ConvGeometry& g, std::span<const T> in, T* col) {
  const auto oh = static_cast<std::ptrdiff_t>(g.out_height());
  const auto ow = static_cast<std::ptrdiff_t>(g.out_width());
  const auto h = static_cast<std::ptrdiff_t>(g.height);
  const auto w = static_cast<std::ptrdiff_t>(g.width);
  const auto k = static_cast<std::ptrdiff_t>(g.kernel);
  const auto s = static_cast<std::ptrdiff_t>(g.stride);
  const auto pad = static_cast<std::ptrdiff_t>(g.padding);
  const auto rows = static_cast<std::ptrdiff_t>(g.in_channels) * k * k;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t r = 0; r < rows; ++r) {
    const std::ptrdiff_t c = r / (k * k);
    const std::ptrdiff_t ky = (r / k) % k;
    const std::ptrdiff_t kx = r % k;
    const T* plane = in.data() + c * h * w;
    T* dst = col + r * oh * ow;
    for (std::ptrdiff_t y = 0; y < oh; ++y) {
      const std::ptrdiff_t iy = y * s + ky - pad;
      T* row = dst + y * ow;
      if (iy < 0 || iy >= h) {
        std::fill(row, row + ow, T{0});
        continue;
      }
      const T* src = plane + iy * w;
      for (std::ptrdiff_t x = 0; x < ow; ++x) {
        const std::ptrdiff_t ix = x * s + kx - pad;
        row[x] = (ix >= 0 && ix < w) ? src[ix] : T{0};
      }
    }
  }
}

// Adjoint of im2col, accumulating into grad_in. Parallel over channels so
// each thread owns a disjoint input plane.
template <typename T>
void col2im(const ConvGeometry& g, const T* col, std::span<T> grad_in) {
  const auto oh = static_cast<std::ptrdiff_t>(g.out_height());
  const auto ow = static_cast<std::ptrdiff_t>(g.out_width());
  const auto h = static_cast<std::ptrdiff_t>(g.height);
  const auto w = static_cast<std::ptrdiff_t>(g.width);
  const auto k = static_cast<std::ptrdiff_t>(g.kernel);
  const auto s = static_cast<std::ptrdiff_t>(g.stride);
  const auto pad = static_cast<std::ptrdiff_t>(g.padding);
  const auto channels = static_cast<std::ptrdiff_t>(g.in_channels);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t c = 0; c < channels; ++c) {
    T* plane = grad_in.data() + c * h * w;
    for (std::ptrdiff_t ky = 0; ky < k; ++ky) {
      for (std::ptrdiff_t kx = 0; kx < k; ++kx) {
        const T* src = col + ((c * k + ky) * k + kx) * oh * ow;
        for (std::ptrdiff_t y = 0; y < oh; ++y) {
          const std::ptrdiff_t iy = y * s + ky - pad;
          if (iy < 0 || iy >= h) continue;
          T* dst = plane + iy * w;
          const T* row = src + y * ow;
          for (std::ptrdiff_t x = 0; x < ow; ++x) {
            const std::ptrdiff_t ix = x * s + kx - pad;
            if (ix >= 0 && ix < w) dst[ix] += row[x];
          }
        }
      }
    }
  }
}

}  // namespace

template <typename T>
void conv2d_forward(const ConvGeometry& g, std::span<const T> in,
                    std::span<const T> weight, std::span<const T> bias,
                    std::span<T> out) {
  const auto taps = static_cast<Eigen::Index>(g.in_channels * g.kernel * g.kernel);
  const auto pixels = static_cast<Eigen::Index>(g.out_height() * g.out_width());
  const auto cout = static_cast<Eigen::Index>(g.out_channels);

  const T* col = in.data();
  if (!is_pointwise(g)) {
    auto& buffer = scratch<T>();
    buffer.resize(static_cast<std::size_t>(taps * pixels));
    im2col(g, in, buffer.data());
    col = buffer.data();
  }
  ConstMatrixMap<T> w(weight.data(), cout, taps);
  ConstMatrixMap<T> c(col, taps, pixels);
  MatrixMap<T> o(out.data(), cout, pixels);
  o.noalias() = w * c;
  if (!bias.empty()) {
    Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>> b(bias.data(), cout);
    o.colwise() += b;
  }
}

template <typename T>
void conv2d_backward(const ConvGeometry& g, std::span<const T> in,
                     std::span<const T> weight, std::span<const T> grad_out,
                     std::span<T> grad_in, std::span<T> grad_weight,
                     std::span<T> grad_bias) {
  const auto taps = static_cast<Eigen::Index>(g.in_channels * g.kernel * g.kernel);
  const auto pixels = static_cast<Eigen::Index>(g.out_height() * g.out_width());
  const auto cout = static_cast<Eigen::Index>(g.out_channels);
  const bool pointwise = is_pointwise(g);

  ConstMatrixMap<T> go(grad_out.data(), cout, pixels);
  if (!grad_bias.empty()) {
    // Plain loop: Eigen's vectorized reductions split the sum according to the
    // buffer address, which would make results depend on heap layout.
    for (Eigen::Index o = 0; o < cout; ++o) {
      const T* row = grad_out.data() + o * pixels;
      T total{0};
      for (Eigen::Index p = 0; p < pixels; ++p) total += row[p];
      grad_bias[static_cast<std::size_t>(o)] += total;
    }
  }

  const T* col = in.data();
  auto& buffer = scratch<T>();
  if (!pointwise) {
    buffer.resize(static_cast<std::size_t>(taps * pixels));
    im2col(g, in, buffer.data());
    col = buffer.data();
  }
  MatrixMap<T> gw(grad_weight.data(), cout, taps);
  gw.noalias() += go * ConstMatrixMap<T>(col, taps, pixels).transpose();

  if (grad_in.empty()) return;
  ConstMatrixMap<T> w(weight.data(), cout, taps);
  if (pointwise) {
    MatrixMap<T> gi(grad_in.data(), taps, pixels);
    gi.noalias() += w.transpose() * go;
    return;
  }
  // The unfolded input is no longer needed; reuse its buffer for d(col).
  MatrixMap<T> gcol(buffer.data(), taps, pixels);
  gcol.noalias() = w.transpose() * go;
  col2im(g, buffer.data(), grad_in);
}

template <typename T>
void upsample2x_forward(std::size_t channels, std::size_t height, std::size_t width,
                        std::span<const T> in, std::span<T> out) {
  const auto rows = static_cast<std::ptrdiff_t>(channels * height);
  const std::size_t ow = 2 * width;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t r = 0; r < rows; ++r) {
    const T* src = in.data() + r * width;
    T* dst = out.data() + 2 * r * ow;
    for (std::size_t x = 0; x < ow; ++x) dst[x] = src[x / 2];
    std::copy(dst, dst + ow, dst + ow);
  }
}

template <typename T>
void upsample2x_backward(std::size_t channels, std::size_t height, std::size_t width,
                         std::span<const T> grad_out, std::span<T> grad_in) {
  const auto rows = static_cast<std::ptrdiff_t>(channels * height);
  const std::size_t ow = 2 * width;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t r = 0; r < rows; ++r) {
    const T* top = grad_out.data() + 2 * r * ow;
    const T* bottom = top + ow;
    T* dst = grad_in.data() + r * width;
    for (std::size_t x = 0; x < width; ++x) {
      dst[x] += top[2 * x] + top[2 * x + 1] + bottom[2 * x] + bottom[2 * x + 1];
    }
  }
}

#define DSP_INSTANTIATE(T)                                                              \
  template void conv2d_forward<T>(const ConvGeometry&, std::span<const T>,              \
                                  std::span<const T>, std::span<const T>, std::span<T>); \
  template void conv2d_backward<T>(const ConvGeometry&, std::span<const T>,             \
                                   std::span<const T>, std::span<const T>, std::span<T>, \
                                   std::span<T>, std::span<T>);                          \
  template void upsample2x_forward<T>(std::size_t, std::size_t, std::size_t,            \
                                      std::span<const T>, std::span<T>);                \
  template void upsample2x_backward<T>(std::size_t, std::size_t, std::size_t,           \
                                       std::span<const T>, std::span<T>);
DSP_INSTANTIATE(float)
DSP_INSTANTIATE(double)
#undef DSP_INSTANTIATE

}  // namespace dsp::kernels
