#include "dsp/adam.hpp"

#include <cmath>
#include <string>

namespace dsp {

template <typename T>
void adam_step(std::span<BasicTensor<T>> params, BasicAdamState<T>& state) {
  if (state.first_moment.empty() && state.step == 0) {
    for (const auto& p : params) {
      state.first_moment.emplace_back(p.numel(), T{0});
      state.second_moment.emplace_back(p.numel(), T{0});
    }
  }
  if (state.first_moment.size() != params.size()) {
    throw ShapeError("adam_step: state tracks " + std::to_string(state.first_moment.size()) +
                     " parameters, got " + std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!params[i].requires_grad() || state.first_moment[i].size() != params[i].numel()) {
      throw ShapeError("adam_step: parameter " + std::to_string(i) + " with shape " +
                       to_string(params[i].shape()) + " does not match its moments");
    }
  }

  ++state.step;
  const auto& o = state.options;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(o.beta1, t);
  const double correction2 = 1.0 - std::pow(o.beta2, t);
  const T step_size = static_cast<T>(o.learning_rate / correction1);
  const T b1 = static_cast<T>(o.beta1), b2 = static_cast<T>(o.beta2);
  const T sqrt_c2 = static_cast<T>(std::sqrt(correction2));
  const T eps = static_cast<T>(o.epsilon);

  for (std::size_t i = 0; i < params.size(); ++i) {
    auto value = params[i].mutable_data();
    auto grad = params[i].grad();
    auto& m = state.first_moment[i];
    auto& v = state.second_moment[i];
    const auto n = static_cast<std::ptrdiff_t>(value.size());
#pragma omp parallel for simd if (n > (1 << 15))
    for (std::ptrdiff_t j = 0; j < n; ++j) {
      m[j] = b1 * m[j] + (T{1} - b1) * grad[j];
      v[j] = b2 * v[j] + (T{1} - b2) * grad[j] * grad[j];
      value[j] -= step_size * m[j] / (std::sqrt(v[j]) / sqrt_c2 + eps);
    }
  }
}

template void adam_step(std::span<BasicTensor<float>>, BasicAdamState<float>&);
template void adam_step(std::span<BasicTensor<double>>, BasicAdamState<double>&);

}  // namespace dsp
