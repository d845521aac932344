#include "dsp/ops.hpp"

#include <cmath>

#include "dsp/kernels.hpp"

namespace dsp::ops {
namespace {

template <typename T>
using Node = detail::Node<T>;

// Below this size the OpenMP fork costs more than the loop.
constexpr std::ptrdiff_t kParallelThreshold = 1 << 15;

template <typename T>
void require_same_shape(const char* op, const BasicTensor<T>& a, const BasicTensor<T>& b) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + to_string(a.shape()) +
                     " vs " + to_string(b.shape()));
  }
}

template <typename T>
void require_rank3(const char* op, const char* what, const BasicTensor<T>& t) {
  if (t.rank() != 3) {
    throw ShapeError(std::string(op) + ": " + what + " must be C x H x W, got " +
                     to_string(t.shape()));
  }
}

template <typename T, typename F>
std::vector<T> map_values(std::span<const T> in, F f) {
  std::vector<T> out(in.size());
  const auto n = static_cast<std::ptrdiff_t>(in.size());
#pragma omp parallel for simd if (n > kParallelThreshold)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = f(in[i]);
  return out;
}

}  // namespace

template <typename T>
BasicTensor<T> add(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  require_same_shape("add", a, b);
  std::vector<T> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] + b.data()[i];
  return BasicTensor<T>::make_result(a.shape(), std::move(out), {a.node(), b.node()},
                                     [](Node<T>& self) {
                                       for (auto& p : self.parents) {
                                         if (!p->requires_grad) continue;
                                         for (std::size_t i = 0; i < self.grad.size(); ++i)
                                           p->grad[i] += self.grad[i];
                                       }
                                     });
}

template <typename T>
BasicTensor<T> sub(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  require_same_shape("sub", a, b);
  std::vector<T> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] - b.data()[i];
  return BasicTensor<T>::make_result(a.shape(), std::move(out), {a.node(), b.node()},
                                     [](Node<T>& self) {
                                       auto& pa = *self.parents[0];
                                       auto& pb = *self.parents[1];
                                       for (std::size_t i = 0; i < self.grad.size(); ++i) {
                                         if (pa.requires_grad) pa.grad[i] += self.grad[i];
                                         if (pb.requires_grad) pb.grad[i] -= self.grad[i];
                                       }
                                     });
}

template <typename T>
BasicTensor<T> mul(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  require_same_shape("mul", a, b);
  std::vector<T> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] * b.data()[i];
  return BasicTensor<T>::make_result(a.shape(), std::move(out), {a.node(), b.node()},
                                     [](Node<T>& self) {
                                       auto& pa = *self.parents[0];
                                       auto& pb = *self.parents[1];
                                       for (std::size_t i = 0; i < self.grad.size(); ++i) {
                                         if (pa.requires_grad) pa.grad[i] += self.grad[i] * pb.data[i];
                                         if (pb.requires_grad) pb.grad[i] += self.grad[i] * pa.data[i];
                                       }
                                     });
}

template <typename T>
BasicTensor<T> scalar_mul(const BasicTensor<T>& a, T s) {
  return BasicTensor<T>::make_result(
      a.shape(), map_values<T>(a.data(), [s](T v) { return s * v; }), {a.node()},
      [s](Node<T>& self) {
        auto& p = *self.parents[0];
        for (std::size_t i = 0; i < self.grad.size(); ++i) p.grad[i] += s * self.grad[i];
      });
}

template <typename T>
BasicTensor<T> rsub_scalar(T s, const BasicTensor<T>& a) {
  return BasicTensor<T>::make_result(
      a.shape(), map_values<T>(a.data(), [s](T v) { return s - v; }), {a.node()},
      [](Node<T>& self) {
        auto& p = *self.parents[0];
        for (std::size_t i = 0; i < self.grad.size(); ++i) p.grad[i] -= self.grad[i];
      });
}

template <typename T>
BasicTensor<T> leaky_relu(const BasicTensor<T>& a, T slope) {
  return BasicTensor<T>::make_result(
      a.shape(), map_values<T>(a.data(), [slope](T v) { return v > T{0} ? v : slope * v; }),
      {a.node()}, [slope](Node<T>& self) {
        auto& p = *self.parents[0];
        const auto n = static_cast<std::ptrdiff_t>(self.grad.size());
#pragma omp parallel for simd if (n > kParallelThreshold)
        for (std::ptrdiff_t i = 0; i < n; ++i)
          p.grad[i] += p.data[i] > T{0} ? self.grad[i] : slope * self.grad[i];
      });
}

template <typename T>
BasicTensor<T> sigmoid(const BasicTensor<T>& a) {
  return BasicTensor<T>::make_result(
      a.shape(), map_values<T>(a.data(), [](T v) { return T{1} / (T{1} + std::exp(-v)); }),
      {a.node()}, [](Node<T>& self) {
        auto& p = *self.parents[0];
        for (std::size_t i = 0; i < self.grad.size(); ++i) {
          const T y = self.data[i];
          p.grad[i] += self.grad[i] * y * (T{1} - y);
        }
      });
}

template <typename T>
BasicTensor<T> sum(const BasicTensor<T>& a) {
  T total{0};
  for (T v : a.data()) total += v;
  return BasicTensor<T>::make_result({1}, {total}, {a.node()}, [](Node<T>& self) {
    auto& p = *self.parents[0];
    for (auto& g : p.grad) g += self.grad[0];
  });
}

template <typename T>
BasicTensor<T> mean(const BasicTensor<T>& a) {
  if (a.numel() == 0) throw ShapeError("mean: empty tensor");
  T total{0};
  for (T v : a.data()) total += v;
  const T inv = T{1} / static_cast<T>(a.numel());
  return BasicTensor<T>::make_result({1}, {total * inv}, {a.node()}, [inv](Node<T>& self) {
    auto& p = *self.parents[0];
    for (auto& g : p.grad) g += self.grad[0] * inv;
  });
}

template <typename T>
BasicTensor<T> sum_squares(const BasicTensor<T>& a) {
  // Accumulate in double so float images of 10^5 pixels keep full precision.
  double total = 0.0;
  for (T v : a.data()) total += static_cast<double>(v) * static_cast<double>(v);
  return BasicTensor<T>::make_result({1}, {static_cast<T>(total)}, {a.node()},
                                     [](Node<T>& self) {
                                       auto& p = *self.parents[0];
                                       const T g = T{2} * self.grad[0];
                                       for (std::size_t i = 0; i < p.grad.size(); ++i)
                                         p.grad[i] += g * p.data[i];
                                     });
}

template <typename T>
BasicTensor<T> conv2d(const BasicTensor<T>& input, const BasicTensor<T>& weight,
                      const BasicTensor<T>& bias, std::size_t stride, std::size_t padding) {
  require_rank3("conv2d", "input", input);
  if (weight.rank() != 4) {
    throw ShapeError("conv2d: weight must be C_out x C_in x k x k, got " +
                     to_string(weight.shape()));
  }
  if (weight.dim(1) != input.dim(0)) {
    throw ShapeError("conv2d: weight expects " + std::to_string(weight.dim(1)) +
                     " input channels, input has " + std::to_string(input.dim(0)));
  }
  if (weight.dim(2) != weight.dim(3)) {
    throw ShapeError("conv2d: kernel must be square, got " + to_string(weight.shape()));
  }
  if (bias.defined() && bias.numel() != weight.dim(0)) {
    throw ShapeError("conv2d: bias has " + std::to_string(bias.numel()) +
                     " elements, expected " + std::to_string(weight.dim(0)));
  }
  kernels::ConvGeometry g{input.dim(0), weight.dim(0), input.dim(1), input.dim(2),
                          weight.dim(2), stride, padding};
  kernels::validate(g);

  std::vector<T> out(g.output_size());
  kernels::conv2d_forward<T>(g, input.data(), weight.data(),
                             bias.defined() ? bias.data() : std::span<const T>{}, out);
  std::vector<typename BasicTensor<T>::NodePtr> parents{input.node(), weight.node()};
  if (bias.defined()) parents.push_back(bias.node());
  return BasicTensor<T>::make_result(
      {g.out_channels, g.out_height(), g.out_width()}, std::move(out), std::move(parents),
      [g](Node<T>& self) {
        auto& in = *self.parents[0];
        auto& w = *self.parents[1];
        Node<T>* b = self.parents.size() > 2 ? self.parents[2].get() : nullptr;
        // The kernel always produces weight/bias grads; frozen parameters
        // get a throwaway buffer.
        std::vector<T> sink_w, sink_b;
        std::span<T> gw(w.grad);
        if (!w.requires_grad) {
          sink_w.assign(w.data.size(), T{0});
          gw = sink_w;
        }
        std::span<T> gb;
        if (b != nullptr) {
          gb = b->grad;
          if (!b->requires_grad) {
            sink_b.assign(b->data.size(), T{0});
            gb = sink_b;
          }
        }
        kernels::conv2d_backward<T>(g, in.data, w.data, self.grad,
                                    in.requires_grad ? std::span<T>(in.grad) : std::span<T>{},
                                    gw, gb);
      });
}

template <typename T>
BasicTensor<T> upsample_nearest2x(const BasicTensor<T>& input) {
  require_rank3("upsample_nearest2x", "input", input);
  const std::size_t c = input.dim(0), h = input.dim(1), w = input.dim(2);
  std::vector<T> out(4 * input.numel());
  kernels::upsample2x_forward<T>(c, h, w, input.data(), out);
  return BasicTensor<T>::make_result({c, 2 * h, 2 * w}, std::move(out), {input.node()},
                                     [c, h, w](Node<T>& self) {
                                       kernels::upsample2x_backward<T>(
                                           c, h, w, self.grad, self.parents[0]->grad);
                                     });
}

template <typename T>
BasicTensor<T> concat_channels(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  require_rank3("concat_channels", "first operand", a);
  require_rank3("concat_channels", "second operand", b);
  if (a.dim(1) != b.dim(1) || a.dim(2) != b.dim(2)) {
    throw ShapeError("concat_channels: spatial mismatch " + to_string(a.shape()) + " vs " +
                     to_string(b.shape()));
  }
  std::vector<T> out;
  out.reserve(a.numel() + b.numel());
  out.insert(out.end(), a.data().begin(), a.data().end());
  out.insert(out.end(), b.data().begin(), b.data().end());
  const std::size_t split = a.numel();
  return BasicTensor<T>::make_result(
      {a.dim(0) + b.dim(0), a.dim(1), a.dim(2)}, std::move(out), {a.node(), b.node()},
      [split](Node<T>& self) {
        auto& pa = *self.parents[0];
        auto& pb = *self.parents[1];
        if (pa.requires_grad)
          for (std::size_t i = 0; i < split; ++i) pa.grad[i] += self.grad[i];
        if (pb.requires_grad)
          for (std::size_t i = split; i < self.grad.size(); ++i) pb.grad[i - split] += self.grad[i];
      });
}

template <typename T>
BasicTensor<T> channel_norm(const BasicTensor<T>& input, const BasicTensor<T>& scale,
                            const BasicTensor<T>& shift, T eps) {
  require_rank3("channel_norm", "input", input);
  const std::size_t channels = input.dim(0);
  const std::size_t plane = input.dim(1) * input.dim(2);
  if (scale.numel() != channels || shift.numel() != channels) {
    throw ShapeError("channel_norm: affine parameters need " + std::to_string(channels) +
                     " elements, got scale " + to_string(scale.shape()) + " and shift " +
                     to_string(shift.shape()));
  }
  // Normalized activations and inverse std devs are kept for the backward pass.
  auto normalized = std::make_shared<std::vector<T>>(input.numel());
  auto inv_std = std::make_shared<std::vector<T>>(channels);
  std::vector<T> out(input.numel());
  const auto nc = static_cast<std::ptrdiff_t>(channels);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t c = 0; c < nc; ++c) {
    const T* x = input.data().data() + c * plane;
    double m = 0.0;
    for (std::size_t i = 0; i < plane; ++i) m += x[i];
    m /= static_cast<double>(plane);
    double var = 0.0;
    for (std::size_t i = 0; i < plane; ++i) var += (x[i] - m) * (x[i] - m);
    var /= static_cast<double>(plane);
    const T is = static_cast<T>(1.0 / std::sqrt(var + static_cast<double>(eps)));
    (*inv_std)[c] = is;
    T* xh = normalized->data() + c * plane;
    T* y = out.data() + c * plane;
    const T a = scale.data()[c], b = shift.data()[c];
    for (std::size_t i = 0; i < plane; ++i) {
      xh[i] = static_cast<T>(x[i] - m) * is;
      y[i] = a * xh[i] + b;
    }
  }
  return BasicTensor<T>::make_result(
      input.shape(), std::move(out), {input.node(), scale.node(), shift.node()},
      [normalized, inv_std, channels, plane](Node<T>& self) {
        auto& in = *self.parents[0];
        auto& sc = *self.parents[1];
        auto& sh = *self.parents[2];
        const auto nc = static_cast<std::ptrdiff_t>(channels);
        const T n = static_cast<T>(plane);
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t c = 0; c < nc; ++c) {
          const T* gy = self.grad.data() + c * plane;
          const T* xh = normalized->data() + c * plane;
          T sum_g{0}, sum_gx{0};
          for (std::size_t i = 0; i < plane; ++i) {
            sum_g += gy[i];
            sum_gx += gy[i] * xh[i];
          }
          if (sc.requires_grad) sc.grad[c] += sum_gx;
          if (sh.requires_grad) sh.grad[c] += sum_g;
          if (!in.requires_grad) continue;
          // d x = a * inv_std / n * (n g - sum g - xhat sum(g xhat))
          const T a = sc.data[c];
          const T k = a * (*inv_std)[c] / n;
          T* gx = in.grad.data() + c * plane;
          for (std::size_t i = 0; i < plane; ++i)
            gx[i] += k * (n * gy[i] - sum_g - xh[i] * sum_gx);
        }
      });
}

#define DSP_INSTANTIATE(T)                                                                 \
  template BasicTensor<T> add(const BasicTensor<T>&, const BasicTensor<T>&);               \
  template BasicTensor<T> sub(const BasicTensor<T>&, const BasicTensor<T>&);               \
  template BasicTensor<T> mul(const BasicTensor<T>&, const BasicTensor<T>&);               \
  template BasicTensor<T> scalar_mul(const BasicTensor<T>&, T);                            \
  template BasicTensor<T> rsub_scalar(T, const BasicTensor<T>&);                           \
  template BasicTensor<T> leaky_relu(const BasicTensor<T>&, T);                            \
  template BasicTensor<T> sigmoid(const BasicTensor<T>&);                                  \
  template BasicTensor<T> sum(const BasicTensor<T>&);                                      \
  template BasicTensor<T> mean(const BasicTensor<T>&);                                     \
  template BasicTensor<T> sum_squares(const BasicTensor<T>&);                              \
  template BasicTensor<T> conv2d(const BasicTensor<T>&, const BasicTensor<T>&,             \
                                 const BasicTensor<T>&, std::size_t, std::size_t);         \
  template BasicTensor<T> upsample_nearest2x(const BasicTensor<T>&);                       \
  template BasicTensor<T> concat_channels(const BasicTensor<T>&, const BasicTensor<T>&);   \
  template BasicTensor<T> channel_norm(const BasicTensor<T>&, const BasicTensor<T>&,       \
                                       const BasicTensor<T>&, T);
DSP_INSTANTIATE(float)
DSP_INSTANTIATE(double)
#undef DSP_INSTANTIATE

}  // namespace dsp::ops
