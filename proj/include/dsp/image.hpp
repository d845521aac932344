#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <vector>

#include "dsp/tensor.hpp"

namespace dsp {

/// Grayscale raster with values in [0, 1]. Contours are dark (0) and the
/// background is light (1) everywhere in this library.
class BinaryImage {
 public:
  BinaryImage() = default;
  BinaryImage(std::size_t height, std::size_t width, float fill = 1.0f)
      : height_(height), width_(width), pixels_(height * width, fill) {}
  BinaryImage(std::size_t height, std::size_t width, std::vector<float> pixels);

  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  std::size_t size() const { return pixels_.size(); }
  bool empty() const { return pixels_.empty(); }

  float operator()(std::size_t row, std::size_t col) const { return pixels_[row * width_ + col]; }
  float& operator()(std::size_t row, std::size_t col) { return pixels_[row * width_ + col]; }

  std::span<const float> pixels() const { return pixels_; }
  std::span<float> pixels() { return pixels_; }

  bool is_dark(std::size_t row, std::size_t col, float threshold = 0.5f) const {
    return (*this)(row, col) < threshold;
  }
  /// phi(x): number of pixels below threshold.
  std::size_t dark_count(float threshold = 0.5f) const;

  /// Hard {0, 1} copy.
  BinaryImage binarized(float threshold = 0.5f) const;

  bool operator==(const BinaryImage&) const = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<float> pixels_;
};

class ImageIoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Reads an 8-bit PNG (gray, gray+alpha, RGB, RGBA or palette), averaging
/// color channels, scaled to [0, 1].
BinaryImage read_png(const std::filesystem::path& path);

/// Writes 8-bit grayscale: 0 = contour, 255 = background.
void write_png(const std::filesystem::path& path, const BinaryImage& image);

/// Writes several equally sized images side by side.
void write_png_strip(const std::filesystem::path& path, std::span<const BinaryImage> frames);

/// channels x H x W tensor with the image replicated in every channel.
template <typename T = float>
BasicTensor<T> to_tensor(const BinaryImage& image, std::size_t channels = 1);

/// Channel mean of a C x H x W tensor.
template <typename T>
BinaryImage from_tensor(const BasicTensor<T>& tensor);

/// Pads bottom/right with background so both sides become multiples of
/// `multiple`.
BinaryImage pad_to_multiple(const BinaryImage& image, std::size_t multiple);

/// Top-left height x width window.
BinaryImage crop(const BinaryImage& image, std::size_t height, std::size_t width);

}  // namespace dsp
