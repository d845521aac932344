#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dsp/tensor.hpp"

namespace dsp {

struct AdamOptions {
  double learning_rate = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Moment accumulators for one parameter list. Moments are created lazily
/// on the first step and must keep matching the parameter shapes.
template <typename T>
struct BasicAdamState {
  AdamOptions options;
  std::uint64_t step = 0;
  std::vector<std::vector<T>> first_moment;
  std::vector<std::vector<T>> second_moment;
};

using AdamState = BasicAdamState<float>;

/// One bias-corrected ADAM update using each parameter's accumulated grad.
/// Throws ShapeError if the parameter list no longer matches the state.
template <typename T>
void adam_step(std::span<BasicTensor<T>> params, BasicAdamState<T>& state);

}  // namespace dsp
