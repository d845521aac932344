#include "dsp/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <string>

namespace dsp {

BinaryImage::BinaryImage(std::size_t height, std::size_t width, std::vector<float> pixels)
    : height_(height), width_(width), pixels_(std::move(pixels)) {
  if (pixels_.size() != height * width) {
    throw ShapeError("image: " + std::to_string(height) + "x" + std::to_string(width) +
                     " needs " + std::to_string(height * width) + " pixels, got " +
                     std::to_string(pixels_.size()));
  }
}

std::size_t BinaryImage::dark_count(float threshold) const {
  return static_cast<std::size_t>(
      std::count_if(pixels_.begin(), pixels_.end(), [threshold](float v) { return v < threshold; }));
}

BinaryImage BinaryImage::binarized(float threshold) const {
  BinaryImage out(height_, width_);
  for (std::size_t i = 0; i < pixels_.size(); ++i) out.pixels_[i] = pixels_[i] < threshold ? 0.0f : 1.0f;
  return out;
}

BinaryImage read_png(const std::filesystem::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    throw ImageIoError("cannot read " + path.string() + ": " + image.message);
  }
  // Let libpng expand everything to 8-bit RGB with the alpha composited
  // onto a white background.
  image.format = PNG_FORMAT_RGB;
  std::vector<std::uint8_t> buffer(PNG_IMAGE_SIZE(image));
  png_color background{255, 255, 255};
  if (!png_image_finish_read(&image, &background, buffer.data(), 0, nullptr)) {
    png_image_free(&image);
    throw ImageIoError("cannot decode " + path.string() + ": " + image.message);
  }
  BinaryImage out(image.height, image.width);
  auto pixels = out.pixels();
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    const unsigned sum = buffer[3 * i] + buffer[3 * i + 1] + buffer[3 * i + 2];
    pixels[i] = static_cast<float>(sum) / (3.0f * 255.0f);
  }
  return out;
}

namespace {

void write_gray(const std::filesystem::path& path, std::size_t height, std::size_t width,
                const std::vector<std::uint8_t>& bytes) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(width);
  image.height = static_cast<png_uint_32>(height);
  image.format = PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&image, path.c_str(), 0, bytes.data(), 0, nullptr)) {
    throw ImageIoError("cannot write " + path.string() + ": " + image.message);
  }
}

std::uint8_t to_byte(float v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f));
}

}  // namespace

void write_png(const std::filesystem::path& path, const BinaryImage& image) {
  std::vector<std::uint8_t> bytes(image.size());
  std::transform(image.pixels().begin(), image.pixels().end(), bytes.begin(), to_byte);
  write_gray(path, image.height(), image.width(), bytes);
}

void write_png_strip(const std::filesystem::path& path, std::span<const BinaryImage> frames) {
  if (frames.empty()) throw ImageIoError("cannot write an empty strip to " + path.string());
  const std::size_t h = frames[0].height(), w = frames[0].width();
  constexpr std::size_t kSeparator = 2;
  const std::size_t total_w = frames.size() * w + (frames.size() - 1) * kSeparator;
  std::vector<std::uint8_t> bytes(h * total_w, 128);
  for (std::size_t f = 0; f < frames.size(); ++f) {
    if (frames[f].height() != h || frames[f].width() != w) {
      throw ShapeError("strip frames must share one size");
    }
    for (std::size_t r = 0; r < h; ++r)
      for (std::size_t c = 0; c < w; ++c)
        bytes[r * total_w + f * (w + kSeparator) + c] = to_byte(frames[f](r, c));
  }
  write_gray(path, h, total_w, bytes);
}

template <typename T>
BasicTensor<T> to_tensor(const BinaryImage& image, std::size_t channels) {
  std::vector<T> data;
  data.reserve(channels * image.size());
  for (std::size_t c = 0; c < channels; ++c)
    for (float v : image.pixels()) data.push_back(static_cast<T>(v));
  return BasicTensor<T>::from_data({channels, image.height(), image.width()}, std::move(data));
}

template <typename T>
BinaryImage from_tensor(const BasicTensor<T>& tensor) {
  if (tensor.rank() != 3) {
    throw ShapeError("from_tensor: expected C x H x W, got " + to_string(tensor.shape()));
  }
  const std::size_t c = tensor.dim(0), plane = tensor.dim(1) * tensor.dim(2);
  std::vector<float> pixels(plane, 0.0f);
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t i = 0; i < plane; ++i) pixels[i] += static_cast<float>(tensor.data()[ch * plane + i]);
  if (c > 1)
    for (auto& p : pixels) p /= static_cast<float>(c);
  return BinaryImage(tensor.dim(1), tensor.dim(2), std::move(pixels));
}

BinaryImage pad_to_multiple(const BinaryImage& image, std::size_t multiple) {
  const auto round_up = [multiple](std::size_t n) { return (n + multiple - 1) / multiple * multiple; };
  BinaryImage out(round_up(image.height()), round_up(image.width()), 1.0f);
  for (std::size_t r = 0; r < image.height(); ++r)
    for (std::size_t c = 0; c < image.width(); ++c) out(r, c) = image(r, c);
  return out;
}

BinaryImage crop(const BinaryImage& image, std::size_t height, std::size_t width) {
  if (height > image.height() || width > image.width()) {
    throw ShapeError("crop: window larger than image");
  }
  BinaryImage out(height, width);
  for (std::size_t r = 0; r < height; ++r)
    for (std::size_t c = 0; c < width; ++c) out(r, c) = image(r, c);
  return out;
}

template BasicTensor<float> to_tensor<float>(const BinaryImage&, std::size_t);
template BasicTensor<double> to_tensor<double>(const BinaryImage&, std::size_t);
template BinaryImage from_tensor(const BasicTensor<float>&);
template BinaryImage from_tensor(const BasicTensor<double>&);

}  // namespace dsp
