#include "dsp/generator.hpp"

#include <cmath>
#include <stdexcept>

#include "dsp/errors.hpp"
#include "dsp/ops.hpp"
#include "dsp/random.hpp"

namespace dsp {
namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError("generator config: " + message);
}

template <typename T>
void add_conv(BasicGeneratorParams<T>& params, Rng& rng, const std::string& name,
              std::size_t in_channels, std::size_t out_channels, std::size_t kernel,
              bool with_norm) {
  const std::size_t fan_in = in_channels * kernel * kernel;
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::vector<T> weight(out_channels * fan_in);
  for (auto& w : weight) w = static_cast<T>(rng.uniform(-bound, bound));
  std::vector<T> bias(out_channels);
  for (auto& b : bias) b = static_cast<T>(rng.uniform(-bound, bound));
  params.entries.push_back(
      {name + ".weight",
       BasicTensor<T>::from_data({out_channels, in_channels, kernel, kernel}, std::move(weight),
                                 true)});
  params.entries.push_back(
      {name + ".bias", BasicTensor<T>::from_data({out_channels}, std::move(bias), true)});
  if (with_norm) {
    params.entries.push_back({name + ".norm_scale", BasicTensor<T>::full({out_channels}, T{1}, true)});
    params.entries.push_back({name + ".norm_shift", BasicTensor<T>::zeros({out_channels}, true)});
  }
}

// Walks the parameter list in construction order.
template <typename T>
class ParamCursor {
 public:
  explicit ParamCursor(const BasicGeneratorParams<T>& params) : params_(params) {}
  const BasicTensor<T>& next() { return params_.entries.at(index_++).tensor; }

 private:
  const BasicGeneratorParams<T>& params_;
  std::size_t index_ = 0;
};

template <typename T>
BasicTensor<T> conv_block(ParamCursor<T>& cursor, const GeneratorConfig& config,
                          const BasicTensor<T>& input, std::size_t stride) {
  const auto& weight = cursor.next();
  const auto& bias = cursor.next();
  const std::size_t padding = (weight.dim(2) - 1) / 2;
  auto y = ops::conv2d(input, weight, bias, stride, padding);
  if (config.normalize) {
    const auto& scale = cursor.next();
    const auto& shift = cursor.next();
    y = ops::channel_norm(y, scale, shift);
  }
  return ops::leaky_relu(y, static_cast<T>(config.activation_slope));
}

}  // namespace

void validate(const GeneratorConfig& c) {
  require(c.depth >= 1 && c.depth <= 12, "depth must be in [1, 12], got " + std::to_string(c.depth));
  require(c.down_channels >= 1, "down_channels must be >= 1");
  require(c.up_channels >= 1, "up_channels must be >= 1");
  require(c.skip_channels >= 1, "skip_channels must be >= 1");
  require(c.noise_channels >= 1, "noise_channels must be >= 1");
  require(c.output_channels >= 1, "output_channels must be >= 1");
  require(c.main_kernel >= 1 && c.main_kernel % 2 == 1,
          "main_kernel must be odd, got " + std::to_string(c.main_kernel));
  require(c.skip_kernel >= 1 && c.skip_kernel % 2 == 1,
          "skip_kernel must be odd, got " + std::to_string(c.skip_kernel));
  require(c.activation_slope >= 0.0 && c.activation_slope < 1.0,
          "activation_slope must be in [0, 1)");
}

template <typename T>
std::vector<BasicTensor<T>> BasicGeneratorParams<T>::tensors() const {
  std::vector<BasicTensor<T>> out;
  out.reserve(entries.size());
  for (const auto& e : entries) out.push_back(e.tensor);
  return out;
}

template <typename T>
const BasicTensor<T>& BasicGeneratorParams<T>::at(const std::string& name) const {
  for (const auto& e : entries)
    if (e.name == name) return e.tensor;
  throw std::out_of_range("generator has no parameter named " + name);
}

template <typename T>
std::size_t BasicGeneratorParams<T>::parameter_count() const {
  std::size_t n = 0;
  for (const auto& e : entries) n += e.tensor.numel();
  return n;
}

template <typename T>
BasicGeneratorParams<T> init_generator(const GeneratorConfig& config, std::uint64_t seed) {
  validate(config);
  BasicGeneratorParams<T> params{config, {}};
  Rng rng(seed);
  const auto depth = static_cast<std::size_t>(config.depth);
  const auto down = static_cast<std::size_t>(config.down_channels);
  const auto up = static_cast<std::size_t>(config.up_channels);
  const auto skip = static_cast<std::size_t>(config.skip_channels);
  const auto noise = static_cast<std::size_t>(config.noise_channels);
  const auto main_k = static_cast<std::size_t>(config.main_kernel);
  const auto skip_k = static_cast<std::size_t>(config.skip_kernel);
  const bool norm = config.normalize;

  for (std::size_t i = 0; i < depth; ++i)
    add_conv(params, rng, "down" + std::to_string(i), i == 0 ? noise : down, down, main_k, norm);
  for (std::size_t i = 0; i < depth; ++i)
    add_conv(params, rng, "skip" + std::to_string(i), i == 0 ? noise : down, skip, skip_k, norm);
  for (std::size_t i = depth; i-- > 0;)
    add_conv(params, rng, "up" + std::to_string(i), skip + (i + 1 == depth ? down : up), up,
             main_k, norm);
  add_conv(params, rng, "out", up, static_cast<std::size_t>(config.output_channels), 1, false);
  return params;
}

template <typename T>
BasicTensor<T> make_noise(std::size_t channels, std::size_t height, std::size_t width,
                          std::uint64_t seed, std::size_t size_multiple) {
  if (size_multiple == 0 || height % size_multiple != 0 || width % size_multiple != 0 ||
      height == 0 || width == 0) {
    throw ConfigError("noise: " + std::to_string(height) + "x" + std::to_string(width) +
                      " is not a positive multiple of " + std::to_string(size_multiple));
  }
  Rng rng(seed);
  std::vector<T> values(channels * height * width);
  for (auto& v : values) v = static_cast<T>(0.1 * rng.uniform());
  return BasicTensor<T>::from_data({channels, height, width}, std::move(values), false);
}

template <typename T>
BasicTensor<T> forward(const BasicGeneratorParams<T>& params, const BasicTensor<T>& noise) {
  const auto& config = params.config;
  const auto depth = static_cast<std::size_t>(config.depth);
  if (noise.rank() != 3 || noise.dim(0) != static_cast<std::size_t>(config.noise_channels) ||
      noise.dim(1) % config.size_multiple() != 0 || noise.dim(2) % config.size_multiple() != 0) {
    throw ShapeError("generator: noise must be " + std::to_string(config.noise_channels) +
                     " x H x W with H, W multiples of " + std::to_string(config.size_multiple()) +
                     ", got " + to_string(noise.shape()));
  }
  ParamCursor<T> cursor(params);

  // levels[i] is the input of down conv i (resolution H / 2^i).
  std::vector<BasicTensor<T>> levels{noise};
  for (std::size_t i = 0; i < depth; ++i) levels.push_back(conv_block(cursor, config, levels[i], 2));
  std::vector<BasicTensor<T>> skips;
  for (std::size_t i = 0; i < depth; ++i) skips.push_back(conv_block(cursor, config, levels[i], 1));

  BasicTensor<T> x = levels[depth];
  for (std::size_t i = depth; i-- > 0;) {
    x = ops::concat_channels(skips[i], ops::upsample_nearest2x(x));
    x = conv_block(cursor, config, x, 1);
  }
  const auto& out_w = cursor.next();
  const auto& out_b = cursor.next();
  return ops::sigmoid(ops::conv2d(x, out_w, out_b, 1, 0));
}

double receptive_field(std::span<const LayerGeometry> layers) {
  double field = 1.0;
  double jump = 1.0;
  for (const auto& layer : layers) {
    if (layer.upsample) jump /= 2.0;
    field += (layer.kernel - 1) * jump;
    jump *= layer.stride;
  }
  return field;
}

int receptive_field(const GeneratorConfig& config) {
  validate(config);
  std::vector<LayerGeometry> path;
  for (int i = 0; i < config.depth; ++i) path.push_back({config.main_kernel, 2, false});
  for (int i = 0; i < config.depth; ++i) path.push_back({config.main_kernel, 1, true});
  path.push_back({1, 1, false});
  return static_cast<int>(std::lround(receptive_field(path)));
}

#define DSP_INSTANTIATE(T)                                                                \
  template struct BasicGeneratorParams<T>;                                                \
  template BasicGeneratorParams<T> init_generator<T>(const GeneratorConfig&, std::uint64_t); \
  template BasicTensor<T> make_noise<T>(std::size_t, std::size_t, std::size_t, std::uint64_t, \
                                        std::size_t);                                     \
  template BasicTensor<T> forward(const BasicGeneratorParams<T>&, const BasicTensor<T>&);
DSP_INSTANTIATE(float)
DSP_INSTANTIATE(double)
#undef DSP_INSTANTIATE

}  // namespace dsp
