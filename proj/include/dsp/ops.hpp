#pragma once

#include "dsp/tensor.hpp"

namespace dsp::ops {

// Elementwise. Binary ops require identical shapes.
template <typename T> BasicTensor<T> add(const BasicTensor<T>& a, const BasicTensor<T>& b);
template <typename T> BasicTensor<T> sub(const BasicTensor<T>& a, const BasicTensor<T>& b);
template <typename T> BasicTensor<T> mul(const BasicTensor<T>& a, const BasicTensor<T>& b);
template <typename T> BasicTensor<T> scalar_mul(const BasicTensor<T>& a, T s);
/// s - a, used for the 1 - x complements of the energies.
template <typename T> BasicTensor<T> rsub_scalar(T s, const BasicTensor<T>& a);
template <typename T> BasicTensor<T> leaky_relu(const BasicTensor<T>& a, T slope);
template <typename T> BasicTensor<T> sigmoid(const BasicTensor<T>& a);

// Reductions to a single-element tensor of shape [1].
template <typename T> BasicTensor<T> sum(const BasicTensor<T>& a);
template <typename T> BasicTensor<T> mean(const BasicTensor<T>& a);
template <typename T> BasicTensor<T> sum_squares(const BasicTensor<T>& a);

/// Cross-correlation of a C_in x H x W input with a C_out x C_in x k x k
/// weight. bias may be undefined (no bias) or have C_out elements.
template <typename T>
BasicTensor<T> conv2d(const BasicTensor<T>& input, const BasicTensor<T>& weight,
                      const BasicTensor<T>& bias, std::size_t stride, std::size_t padding);

/// C x H x W -> C x 2H x 2W by pixel replication.
template <typename T> BasicTensor<T> upsample_nearest2x(const BasicTensor<T>& input);

/// Concatenates C_a x H x W and C_b x H x W along channels.
template <typename T>
BasicTensor<T> concat_channels(const BasicTensor<T>& a, const BasicTensor<T>& b);

/// Normalizes every channel of a C x H x W map to zero mean and unit
/// variance over its own pixels, then applies a per-channel scale and shift.
template <typename T>
BasicTensor<T> channel_norm(const BasicTensor<T>& input, const BasicTensor<T>& scale,
                            const BasicTensor<T>& shift, T eps = T(1e-5));

}  // namespace dsp::ops
