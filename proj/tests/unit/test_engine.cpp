#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "dsp/dataset.hpp"
#include "dsp/engine.hpp"
#include "dsp/errors.hpp"
#include "dsp/metrics.hpp"

using namespace dsp;

namespace {

RunConfig tiny_config(int iterations = 30) {
  RunConfig c;
  c.generator.depth = 2;
  c.generator.down_channels = 8;
  c.generator.up_channels = 8;
  c.generator.skip_channels = 4;
  c.generator.noise_channels = 8;
  c.max_iterations = iterations;
  c.seed = 3;
  return c;
}

const DatasetSample& sample() {
  static const auto samples = generate_dataset(DatasetKind::Simple, 1, 32, 8);
  return samples.front();
}

}  // namespace

TEST_CASE("trace bookkeeping") {
  const auto& s = sample();
  const auto cfg = tiny_config();
  const auto trace = fit(s.degraded, &s.ground_truth, cfg);
  REQUIRE(trace.rows.size() == static_cast<std::size_t>(cfg.max_iterations));
  CHECK(trace.rows.front().iteration == 1);
  CHECK(trace.best_iteration >= 1);
  CHECK(trace.best_iteration <= cfg.max_iterations);
  REQUIRE(trace.oracle_iteration.has_value());
  CHECK(trace.oracle_mse <= mse(trace.best_output, s.ground_truth));
  CHECK(trace.oracle_mse == mse(trace.oracle_output, s.ground_truth));
  double min_delta = INFINITY;
  for (const auto& r : trace.rows) min_delta = std::min(min_delta, r.delta);
  CHECK(trace.best_delta == min_delta);
  CHECK(trace.rows[trace.best_iteration - 1].delta == min_delta);
  CHECK(trace.rows.back().energy <= trace.rows.front().energy);
}

TEST_CASE("runs are reproducible") {
  const auto& s = sample();
  const auto a = complete(s.degraded, tiny_config(12));
  const auto b = complete(s.degraded, tiny_config(12));
  CHECK(a.best_output == b.best_output);
  for (std::size_t i = 0; i < a.trace.rows.size(); ++i) CHECK(a.trace.rows[i].energy == b.trace.rows[i].energy);
}

TEST_CASE("score cadence and snapshots") {
  auto cfg = tiny_config(10);
  cfg.score_every = 4;
  cfg.snapshot_every = 5;
  const auto trace = complete(sample().degraded, cfg).trace;
  CHECK_FALSE(std::isnan(trace.rows[0].delta));
  CHECK(std::isnan(trace.rows[1].delta));
  CHECK_FALSE(std::isnan(trace.rows[4].delta));
  CHECK_FALSE(std::isnan(trace.rows[9].delta));
  CHECK(std::isnan(trace.rows[0].mse_gt));
  REQUIRE(trace.frames.size() == 2);
  CHECK(trace.frames[1].iteration == 10);
}

TEST_CASE("already complete input keeps its contour") {
  const auto& s = sample();
  auto cfg = tiny_config(60);
  cfg.scores.gamma = 0.0;
  const auto result = complete(s.ground_truth, cfg);
  CHECK(reconstruction_score(result.best_output, s.ground_truth, cfg.scores) > 90.0);
  CHECK(iou(result.best_output, s.ground_truth) > iou(BinaryImage(32, 32), s.ground_truth));
}

TEST_CASE("size and configuration errors") {
  const auto cfg = tiny_config(2);
  CHECK_THROWS_AS(complete(BinaryImage(30, 32), cfg), ConfigError);
  const BinaryImage gt(16, 16);
  CHECK_THROWS_AS(complete_oracle_best(BinaryImage(32, 32), gt, cfg), ConfigError);
  auto bad = cfg;
  bad.learning_rate = 0.0;
  CHECK_THROWS_AS(validate(bad), ConfigError);
  bad = cfg;
  bad.max_iterations = 0;
  CHECK_THROWS_AS(validate(bad), ConfigError);
}

TEST_CASE("gamma estimates") {
  CHECK(estimate_gamma(0.0) == 0.0);
  CHECK(estimate_gamma(0.23) == doctest::Approx(23.0));
  const auto& s = sample();
  const ScoreConfig sc;
  CHECK(estimate_gamma(s.ground_truth, s.degraded, sc) == overfit_score(s.ground_truth, s.degraded, sc));
  CHECK(estimate_gamma(s.ground_truth, s.ground_truth, sc) == 0.0);
}
