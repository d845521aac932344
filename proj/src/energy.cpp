#include "dsp/energy.hpp"

#include <string>

#include "dsp/errors.hpp"
#include "dsp/ops.hpp"

namespace dsp {

void validate(const EnergyConfig& config) {
  if (!(config.alpha >= 0.0 && config.alpha <= 1.0)) {
    throw ConfigError("energy: alpha must be in [0, 1], got " + std::to_string(config.alpha));
  }
}

template <typename T>
BasicTensor<T> dip_energy(const BasicTensor<T>& x, const BasicTensor<T>& incomplete,
                          const BasicTensor<T>& mask) {
  return ops::sum_squares(ops::mul(ops::sub(x, incomplete), mask));
}

template <typename T>
BasicTensor<T> dsp_energy(const BasicTensor<T>& x, const BasicTensor<T>& incomplete, double alpha) {
  validate(EnergyConfig{alpha, EnergyVariant::Dsp});
  const T a = static_cast<T>(alpha);
  auto fill = ops::sum_squares(ops::mul(ops::sub(x, incomplete), incomplete));
  auto contour_mask = ops::rsub_scalar(T{1}, incomplete);
  auto contour = ops::sum_squares(ops::sub(ops::mul(ops::rsub_scalar(T{1}, x), contour_mask),
                                           ops::mul(contour_mask, contour_mask)));
  return ops::add(ops::scalar_mul(fill, a), ops::scalar_mul(contour, T{1} - a));
}

template <typename T>
BasicTensor<T> dsp_self_mask_baseline(const BasicTensor<T>& x, const BasicTensor<T>& incomplete) {
  return dip_energy(x, incomplete, incomplete);
}

template <typename T>
BasicTensor<T> energy(const EnergyConfig& config, const BasicTensor<T>& x,
                      const BasicTensor<T>& incomplete) {
  switch (config.variant) {
    case EnergyVariant::Dsp:
      return dsp_energy(x, incomplete, config.alpha);
    case EnergyVariant::DipSelfMask:
      return dsp_self_mask_baseline(x, incomplete);
  }
  throw ConfigError("energy: unknown variant");
}

#define DSP_INSTANTIATE(T)                                                                    \
  template BasicTensor<T> dip_energy(const BasicTensor<T>&, const BasicTensor<T>&,            \
                                     const BasicTensor<T>&);                                  \
  template BasicTensor<T> dsp_energy(const BasicTensor<T>&, const BasicTensor<T>&, double);   \
  template BasicTensor<T> dsp_self_mask_baseline(const BasicTensor<T>&, const BasicTensor<T>&); \
  template BasicTensor<T> energy(const EnergyConfig&, const BasicTensor<T>&, const BasicTensor<T>&);
DSP_INSTANTIATE(float)
DSP_INSTANTIATE(double)
#undef DSP_INSTANTIATE

}  // namespace dsp
