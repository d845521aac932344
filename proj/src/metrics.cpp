#include "dsp/metrics.hpp"

#include <string>

namespace dsp {
namespace {

void require_same_dims(const char* op, const BinaryImage& a, const BinaryImage& b) {
  if (a.height() != b.height() || a.width() != b.width()) {
    throw ShapeError(std::string(op) + ": image sizes differ (" + std::to_string(a.height()) +
                     "x" + std::to_string(a.width()) + " vs " + std::to_string(b.height()) + "x" +
                     std::to_string(b.width()) + ")");
  }
}

}  // namespace

double mse(const BinaryImage& a, const BinaryImage& b) {
  require_same_dims("mse", a, b);
  if (a.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = 255.0 * (static_cast<double>(a.pixels()[i]) - static_cast<double>(b.pixels()[i]));
    total += d * d;
  }
  return total / static_cast<double>(a.size());
}

double iou(const BinaryImage& a, const BinaryImage& b, float threshold) {
  require_same_dims("iou", a, b);
  std::size_t both = 0, either = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const bool da = a.pixels()[i] < threshold;
    const bool db = b.pixels()[i] < threshold;
    both += da && db;
    either += da || db;
  }
  return either == 0 ? 1.0 : static_cast<double>(both) / static_cast<double>(either);
}

}  // namespace dsp
