#pragma once

#include "dsp/image.hpp"

namespace dsp {

/// Mean over pixels of (255 a - 255 b)^2.
double mse(const BinaryImage& a, const BinaryImage& b);

/// |dark(a) & dark(b)| / |dark(a) | dark(b)|; 1 when both are blank.
double iou(const BinaryImage& a, const BinaryImage& b, float threshold = 0.5f);

}  // namespace dsp
