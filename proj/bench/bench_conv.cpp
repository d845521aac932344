// Serial reference vs OpenMP/GEMM convolution kernels at generator sizes.

#include <benchmark/benchmark.h>

#include <vector>

#include "dsp/kernels.hpp"
#include "dsp/random.hpp"

namespace {

using dsp::kernels::ConvGeometry;

ConvGeometry geometry(const benchmark::State& state) {
  ConvGeometry g;
  g.in_channels = static_cast<std::size_t>(state.range(0));
  g.out_channels = static_cast<std::size_t>(state.range(0));
  g.height = g.width = static_cast<std::size_t>(state.range(1));
  g.kernel = static_cast<std::size_t>(state.range(2));
  g.stride = 1;
  g.padding = g.kernel / 2;
  return g;
}

std::vector<float> filled(std::size_t n, std::uint64_t seed) {
  dsp::Rng rng(seed);
  std::vector<float> v(n);
  for (auto& x : v) x = static_cast<float>(rng.uniform(-1.0, 1.0));
  return v;
}

template <bool Parallel>
void forward(benchmark::State& state) {
  const auto g = geometry(state);
  const auto in = filled(g.input_size(), 1), w = filled(g.weight_size(), 2), b = filled(g.out_channels, 3);
  std::vector<float> out(g.output_size());
  for (auto _ : state) {
    if constexpr (Parallel)
      dsp::kernels::conv2d_forward<float>(g, in, w, b, out);
    else
      dsp::kernels::reference::conv2d_forward<float>(g, in, w, b, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(g.output_size() * g.in_channels * g.kernel * g.kernel));
}

template <bool Parallel>
void backward(benchmark::State& state) {
  const auto g = geometry(state);
  const auto in = filled(g.input_size(), 1), w = filled(g.weight_size(), 2), gout = filled(g.output_size(), 3);
  std::vector<float> gin(g.input_size()), gw(g.weight_size()), gb(g.out_channels);
  for (auto _ : state) {
    if constexpr (Parallel)
      dsp::kernels::conv2d_backward<float>(g, in, w, gout, gin, gw, gb);
    else
      dsp::kernels::reference::conv2d_backward<float>(g, in, w, gout, gin, gw, gb);
    benchmark::DoNotOptimize(gin.data());
  }
}

void sizes(benchmark::internal::Benchmark* b) {
  b->Args({32, 128, 3})->Args({32, 64, 3})->Args({48, 32, 3})->Args({32, 64, 7})->Args({128, 64, 3});
  b->ArgNames({"channels", "side", "kernel"})->Unit(benchmark::kMillisecond);
}

}  // namespace

BENCHMARK(forward<false>)->Name("conv_forward/reference")->Apply(sizes);
BENCHMARK(forward<true>)->Name("conv_forward/parallel")->Apply(sizes);
BENCHMARK(backward<false>)->Name("conv_backward/reference")->Apply(sizes);
BENCHMARK(backward<true>)->Name("conv_backward/parallel")->Apply(sizes);

BENCHMARK_MAIN();
