#include "dsp/kernels.hpp"

#include "dsp/tensor.hpp"

namespace dsp::kernels {

void validate(const ConvGeometry& g) {
  if (g.kernel == 0 || g.stride == 0) {
    throw ShapeError("conv2d: kernel and stride must be positive (kernel=" +
                     std::to_string(g.kernel) + ", stride=" + std::to_string(g.stride) + ")");
  }
  if (g.height + 2 * g.padding < g.kernel || g.width + 2 * g.padding < g.kernel) {
    throw ShapeError("conv2d: kernel " + std::to_string(g.kernel) +
                     " exceeds padded input " + std::to_string(g.height + 2 * g.padding) +
                     "x" + std::to_string(g.width + 2 * g.padding));
  }
}

namespace reference {

template <typename T>
void conv2d_forward(const ConvGeometry& g, std::span<const T> in,
                    std::span<const T> weight, std::span<const T> bias,
                    std::span<T> out) {
  const std::size_t oh = g.out_height(), ow = g.out_width(), k = g.kernel;
  for (std::size_t co = 0; co < g.out_channels; ++co) {
    for (std::size_t y = 0; y < oh; ++y) {
      for (std::size_t x = 0; x < ow; ++x) {
        T acc = bias.empty() ? T{0} : bias[co];
        for (std::size_t ci = 0; ci < g.in_channels; ++ci) {
          for (std::size_t ky = 0; ky < k; ++ky) {
            const auto iy = static_cast<std::ptrdiff_t>(y * g.stride + ky) -
                            static_cast<std::ptrdiff_t>(g.padding);
            if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g.height)) continue;
            for (std::size_t kx = 0; kx < k; ++kx) {
              const auto ix = static_cast<std::ptrdiff_t>(x * g.stride + kx) -
                              static_cast<std::ptrdiff_t>(g.padding);
              if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(g.width)) continue;
              acc += weight[((co * g.in_channels + ci) * k + ky) * k + kx] *
                     in[(ci * g.height + iy) * g.width + ix];
            }
          }
        }
        out[(co * oh + y) * ow + x] = acc;
      }
    }
  }
}

template <typename T>
void conv2d_backward(const ConvGeometry& g, std::span<const T> in,
                     std::span<const T> weight, std::span<const T> grad_out,
                     std::span<T> grad_in, std::span<T> grad_weight,
                     std::span<T> grad_bias) {
  const std::size_t oh = g.out_height(), ow = g.out_width(), k = g.kernel;
  for (std::size_t co = 0; co < g.out_channels; ++co) {
    for (std::size_t y = 0; y < oh; ++y) {
      for (std::size_t x = 0; x < ow; ++x) {
        const T go = grad_out[(co * oh + y) * ow + x];
        if (!grad_bias.empty()) grad_bias[co] += go;
        for (std::size_t ci = 0; ci < g.in_channels; ++ci) {
          for (std::size_t ky = 0; ky < k; ++ky) {
            const auto iy = static_cast<std::ptrdiff_t>(y * g.stride + ky) -
                            static_cast<std::ptrdiff_t>(g.padding);
            if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g.height)) continue;
            for (std::size_t kx = 0; kx < k; ++kx) {
              const auto ix = static_cast<std::ptrdiff_t>(x * g.stride + kx) -
                              static_cast<std::ptrdiff_t>(g.padding);
              if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(g.width)) continue;
              const std::size_t wi = ((co * g.in_channels + ci) * k + ky) * k + kx;
              const std::size_t ii = (ci * g.height + iy) * g.width + ix;
              grad_weight[wi] += go * in[ii];
              if (!grad_in.empty()) grad_in[ii] += go * weight[wi];
            }
          }
        }
      }
    }
  }
}

template <typename T>
void upsample2x_forward(std::size_t channels, std::size_t height, std::size_t width,
                        std::span<const T> in, std::span<T> out) {
  for (std::size_t c = 0; c < channels; ++c)
    for (std::size_t y = 0; y < 2 * height; ++y)
      for (std::size_t x = 0; x < 2 * width; ++x)
        out[(c * 2 * height + y) * 2 * width + x] = in[(c * height + y / 2) * width + x / 2];
}

template <typename T>
void upsample2x_backward(std::size_t channels, std::size_t height, std::size_t width,
                         std::span<const T> grad_out, std::span<T> grad_in) {
  for (std::size_t c = 0; c < channels; ++c)
    for (std::size_t y = 0; y < 2 * height; ++y)
      for (std::size_t x = 0; x < 2 * width; ++x)
        grad_in[(c * height + y / 2) * width + x / 2] +=
            grad_out[(c * 2 * height + y) * 2 * width + x];
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

}  // namespace reference
}  // namespace dsp::kernels
