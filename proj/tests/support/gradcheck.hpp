#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dsp/ops.hpp"
#include "dsp/random.hpp"
#include "dsp/tensor.hpp"

namespace dsp::testing {

using Graph = std::function<Tensor64()>;

struct GradCheck {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
};

// Relative error with an absolute floor so that near-zero gradients do not
// turn rounding noise into huge ratios.
inline double relative_error(double analytic, double numeric, double floor = 1e-4) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

// Fourth-order central differences of `graph` w.r.t. every element of every
// input, compared against one backward() pass. The wide stencil lets h stay
// large enough that rounding in the loss does not dominate.
inline GradCheck check_gradients(const Graph& graph, std::vector<Tensor64> inputs, double h = 1e-4) {
  for (auto& t : inputs) t.zero_grad();
  backward(graph());
  std::vector<std::vector<double>> analytic;
  for (const auto& t : inputs) analytic.emplace_back(t.grad().begin(), t.grad().end());

  GradCheck out;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    auto values = inputs[k].mutable_data();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      const auto at = [&](double offset) {
        values[i] = saved + offset;
        return graph().item();
      };
      const double numeric = (8.0 * (at(h) - at(-h)) - (at(2 * h) - at(-2 * h))) / (12.0 * h);
      values[i] = saved;
      out.max_rel_error = std::max(out.max_rel_error, relative_error(analytic[k][i], numeric));
      ++out.checked;
    }
  }
  return out;
}

inline Tensor64 random_tensor(Shape shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  std::vector<double> data(shape_numel(shape));
  for (auto& v : data) v = rng.uniform(lo, hi);
  return Tensor64::from_data(std::move(shape), std::move(data), true);
}

struct ToyGraph {
  std::string description;
  Graph graph;
  std::vector<Tensor64> inputs;
};

// A random chain of 2-6 differentiable ops on a small C x H x W map, reduced
// to a scalar. Every op of the autodiff library can appear.
inline ToyGraph random_toy_graph(std::uint64_t seed) {
  Rng rng(seed);
  std::size_t c = static_cast<std::size_t>(rng.uniform_int(1, 3));
  std::size_t hw = static_cast<std::size_t>(2 * rng.uniform_int(2, 4));
  ToyGraph toy;
  toy.inputs.push_back(random_tensor({c, hw, hw}, rng));

  std::vector<std::function<Tensor64(const Tensor64&)>> steps;
  const int length = static_cast<int>(rng.uniform_int(2, 6));
  for (int s = 0; s < length; ++s) {
    switch (rng.uniform_int(0, 9)) {
      case 0: {
        auto other = random_tensor({c, hw, hw}, rng);
        toy.inputs.push_back(other);
        steps.push_back([other](const Tensor64& x) { return ops::add(x, other); });
        toy.description += "add ";
        break;
      }
      case 1: {
        auto other = random_tensor({c, hw, hw}, rng);
        toy.inputs.push_back(other);
        steps.push_back([other](const Tensor64& x) { return ops::mul(ops::sub(x, other), other); });
        toy.description += "sub*mul ";
        break;
      }
      case 2: {
        const double s = rng.uniform(-2.0, 2.0);
        steps.push_back([s](const Tensor64& x) { return ops::rsub_scalar(s, ops::scalar_mul(x, 0.5)); });
        toy.description += "scale ";
        break;
      }
      case 3:
        steps.push_back([](const Tensor64& x) { return ops::leaky_relu(x, 0.1); });
        toy.description += "lrelu ";
        break;
      case 4:
        steps.push_back([](const Tensor64& x) { return ops::sigmoid(x); });
        toy.description += "sigmoid ";
        break;
      case 5:
      case 6: {
        const std::size_t k = rng.uniform_int(0, 1) ? 3 : 1;
        const std::size_t stride = (hw % 2 == 0 && hw >= 4 && rng.uniform_int(0, 1)) ? 2 : 1;
        const std::size_t out_c = static_cast<std::size_t>(rng.uniform_int(1, 3));
        auto w = random_tensor({out_c, c, k, k}, rng);
        auto b = random_tensor({out_c}, rng);
        toy.inputs.push_back(w);
        toy.inputs.push_back(b);
        steps.push_back([w, b, stride, k](const Tensor64& x) {
          return ops::conv2d(x, w, b, stride, k / 2);
        });
        c = out_c;
        hw = (hw + 2 * (k / 2) - k) / stride + 1;
        toy.description += "conv" + std::to_string(k) + "s" + std::to_string(stride) + " ";
        break;
      }
      case 7:
        if (hw <= 4) {
          steps.push_back([](const Tensor64& x) { return ops::upsample_nearest2x(x); });
          hw *= 2;
          toy.description += "up ";
        } else {
          steps.push_back([](const Tensor64& x) { return ops::sigmoid(x); });
          toy.description += "sigmoid ";
        }
        break;
      case 8: {
        auto other = random_tensor({1, hw, hw}, rng);
        toy.inputs.push_back(other);
        steps.push_back([other](const Tensor64& x) { return ops::concat_channels(x, other); });
        c += 1;
        toy.description += "concat ";
        break;
      }
      default: {
        if (hw * hw < 4) break;
        auto scale = random_tensor({c}, rng, 0.5, 1.5);
        auto shift = random_tensor({c}, rng);
        toy.inputs.push_back(scale);
        toy.inputs.push_back(shift);
        steps.push_back([scale, shift](const Tensor64& x) { return ops::channel_norm(x, scale, shift); });
        toy.description += "norm ";
        break;
      }
    }
  }
  const bool squares = rng.uniform_int(0, 1);
  toy.description += squares ? "sum_squares" : "mean";
  const auto root = toy.inputs.front();
  toy.graph = [root, steps, squares]() {
    Tensor64 x = root;
    for (const auto& step : steps) x = step(x);
    return squares ? ops::sum_squares(x) : ops::mean(x);
  };
  return toy;
}

}  // namespace dsp::testing
