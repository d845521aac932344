#include <doctest.h>

#include "dsp/energy.hpp"
#include "dsp/errors.hpp"
#include "support/gradcheck.hpp"

using namespace dsp;

namespace {

// alpha * ||(x - xI) xI||^2 + (1 - alpha) * ||(x - xI)(1 - xI)||^2 by plain loops.
double factored(std::span<const double> x, std::span<const double> xi, double alpha) {
  double fill = 0, contour = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - xi[i];
    fill += d * d * xi[i] * xi[i];
    contour += d * d * (1 - xi[i]) * (1 - xi[i]);
  }
  return alpha * fill + (1 - alpha) * contour;
}

}  // namespace

TEST_CASE("energy equals the factored form") {
  Rng rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const auto x = testing::random_tensor({1, 6, 5}, rng, 0.0, 1.0);
    auto xi = testing::random_tensor({1, 6, 5}, rng, 0.0, 1.0).clone();
    if (trial % 2) {
      for (auto& v : xi.mutable_data()) v = v < 0.3 ? 0.0 : 1.0;
    }
    const double alpha = rng.uniform();
    CHECK(dsp_energy(x, xi, alpha).item() == doctest::Approx(factored(x.data(), xi.data(), alpha)).epsilon(1e-12));
  }
}

TEST_CASE("alpha = 1 is exactly the self-masked reconstruction energy") {
  Rng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const auto x = testing::random_tensor({1, 7, 7}, rng, 0.0, 1.0);
    const auto xi = testing::random_tensor({1, 7, 7}, rng, 0.0, 1.0);
    CHECK(dsp_energy(x, xi, 1.0).item() == dsp_self_mask_baseline(x, xi).item());
    CHECK(dip_energy(x, xi, xi).item() == dsp_self_mask_baseline(x, xi).item());
  }
}

TEST_CASE("energy vanishes at the incomplete image and is affine in alpha") {
  Rng rng(3);
  const auto x = testing::random_tensor({1, 4, 4}, rng, 0.0, 1.0);
  const auto xi = testing::random_tensor({1, 4, 4}, rng, 0.0, 1.0);
  CHECK(dsp_energy(xi, xi, 0.4).item() == 0.0);
  const double e0 = dsp_energy(x, xi, 0.0).item(), e1 = dsp_energy(x, xi, 1.0).item();
  for (double a : {0.15, 0.5, 0.8}) CHECK(dsp_energy(x, xi, a).item() == doctest::Approx(e0 + a * (e1 - e0)));
}

TEST_CASE("binary target: fill term on background, contour term on strokes") {
  // One background pixel (1) and one contour pixel (0).
  const auto xi = Tensor64::from_data({1, 1, 2}, {1.0, 0.0});
  const auto x = Tensor64::from_data({1, 1, 2}, {0.25, 0.5});
  CHECK(dsp_energy(x, xi, 1.0).item() == doctest::Approx(0.75 * 0.75));
  CHECK(dsp_energy(x, xi, 0.0).item() == doctest::Approx(0.25));
}

TEST_CASE("energy gradient matches central differences") {
  Rng rng(4);
  const auto x = testing::random_tensor({1, 5, 5}, rng, 0.0, 1.0);
  const auto xi = testing::random_tensor({1, 5, 5}, rng, 0.0, 1.0).clone();
  for (double alpha : {0.0, 0.15, 1.0}) {
    const auto r = testing::check_gradients([&] { return dsp_energy(x, xi, alpha); }, {x});
    CHECK(r.max_rel_error < 1e-4);
  }
}

TEST_CASE("dispatch and validation") {
  Rng rng(5);
  const auto x = testing::random_tensor({1, 3, 3}, rng, 0.0, 1.0);
  const auto xi = testing::random_tensor({1, 3, 3}, rng, 0.0, 1.0);
  CHECK(energy(EnergyConfig{0.3, EnergyVariant::Dsp}, x, xi).item() == dsp_energy(x, xi, 0.3).item());
  CHECK(energy(EnergyConfig{0.3, EnergyVariant::DipSelfMask}, x, xi).item() ==
        dsp_self_mask_baseline(x, xi).item());
  CHECK_THROWS_AS(dsp_energy(x, xi, 1.5), ConfigError);
  CHECK_THROWS_AS(validate(EnergyConfig{-0.1}), ConfigError);
}
