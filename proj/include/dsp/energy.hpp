#pragma once

#include "dsp/tensor.hpp"

namespace dsp {

enum class EnergyVariant {
  Dsp,          // maskless contour energy
  DipSelfMask,  // masked reconstruction with the incomplete image as mask
};

struct EnergyConfig {
  /// Weight of the background (fill-in) term; the contour term gets 1 - alpha.
  double alpha = 0.15;
  EnergyVariant variant = EnergyVariant::Dsp;
};

void validate(const EnergyConfig& config);

/// ||(x - x_I) * m||^2, summed over every element.
template <typename T>
BasicTensor<T> dip_energy(const BasicTensor<T>& x, const BasicTensor<T>& incomplete,
                          const BasicTensor<T>& mask);

/// alpha * ||(x - x_I) * x_I||^2
///   + (1 - alpha) * ||(1 - x) * (1 - x_I) - (1 - x_I) * (1 - x_I)||^2
///
/// With contours at 0 and background at 1, the first term pulls the output
/// toward the incomplete image on background pixels and the second on
/// contour pixels. Throws ConfigError for alpha outside [0, 1].
template <typename T>
BasicTensor<T> dsp_energy(const BasicTensor<T>& x, const BasicTensor<T>& incomplete, double alpha);

/// dip_energy with the incomplete image as its own mask.
template <typename T>
BasicTensor<T> dsp_self_mask_baseline(const BasicTensor<T>& x, const BasicTensor<T>& incomplete);

/// Dispatches on config.variant.
template <typename T>
BasicTensor<T> energy(const EnergyConfig& config, const BasicTensor<T>& x,
                      const BasicTensor<T>& incomplete);

}  // namespace dsp
