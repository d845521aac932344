#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dsp/tensor.hpp"

namespace dsp {

/// Hourglass generator architecture. Defaults are the full-size network:
/// five stride-2 levels, 128 channels on the down/up paths, 64 on skips.
struct GeneratorConfig {
  int depth = 5;
  int down_channels = 128;
  int up_channels = 128;
  int skip_channels = 64;
  int main_kernel = 3;
  int skip_kernel = 1;
  int noise_channels = 32;
  int output_channels = 1;
  double activation_slope = 0.1;
  bool normalize = true;

  /// Spatial extents must be multiples of this.
  std::size_t size_multiple() const { return std::size_t{1} << depth; }
};

/// Throws ConfigError naming the first invalid field.
void validate(const GeneratorConfig& config);

template <typename T>
struct NamedParameter {
  std::string name;
  BasicTensor<T> tensor;
};

/// Every trainable tensor of the generator, in a fixed order: per level
/// the down convs, then the skip convs, then the up convs from the deepest
/// level upward, then the output conv.
template <typename T>
struct BasicGeneratorParams {
  GeneratorConfig config;
  std::vector<NamedParameter<T>> entries;

  std::vector<BasicTensor<T>> tensors() const;
  const BasicTensor<T>& at(const std::string& name) const;
  std::size_t parameter_count() const;
};

using GeneratorParams = BasicGeneratorParams<float>;

/// Weights and biases ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)); normalization
/// scale 1 and shift 0.
template <typename T = float>
BasicGeneratorParams<T> init_generator(const GeneratorConfig& config, std::uint64_t seed);

/// Fixed input noise, i.i.d. U[0, 0.1]. Height and width must be multiples
/// of size_multiple (pass config.size_multiple()).
template <typename T = float>
BasicTensor<T> make_noise(std::size_t channels, std::size_t height, std::size_t width,
                          std::uint64_t seed, std::size_t size_multiple = 1);

/// Maps noise (noise_channels x H x W) to an output_channels x H x W image
/// in (0, 1).
template <typename T>
BasicTensor<T> forward(const BasicGeneratorParams<T>& params, const BasicTensor<T>& noise);

struct LayerGeometry {
  int kernel = 1;
  int stride = 1;
  bool upsample = false;  // nearest 2x before the conv
};

/// Receptive field of a chain of layers, by the usual recurrence
/// r += (k - 1) * jump; jump *= stride (halved by an upsample).
double receptive_field(std::span<const LayerGeometry> layers);

/// Receptive field along the deepest encoder/decoder path.
int receptive_field(const GeneratorConfig& config);

}  // namespace dsp
