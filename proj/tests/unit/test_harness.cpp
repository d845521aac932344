#include <doctest.h>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <numeric>

#include "dsp/errors.hpp"
#include "dsp/harness.hpp"
#include "dsp/metrics.hpp"

using namespace dsp;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  const auto dir = fs::temp_directory_path() / "dsp_test_harness";
  fs::create_directories(dir);
  return dir;
}

RunConfig tiny_config() {
  RunConfig c;
  c.generator.depth = 2;
  c.generator.down_channels = 4;
  c.generator.up_channels = 4;
  c.generator.skip_channels = 2;
  c.generator.noise_channels = 4;
  c.max_iterations = 6;
  return c;
}

}  // namespace

TEST_CASE("pearson correlation") {
  const std::vector<double> x{1, 2, 3, 4, 5};
  const std::vector<double> y{2, 4, 6, 8, 10};
  const std::vector<double> z{5, 4, 3, 2, 1};
  CHECK(pearson(x, y) == doctest::Approx(1.0));
  CHECK(pearson(x, z) == doctest::Approx(-1.0));
  // Hand computation: x = {1, 2, 3}, y = {1, 3, 2} gives r = 0.5.
  CHECK(pearson(std::vector<double>{1, 2, 3}, std::vector<double>{1, 3, 2}) == doctest::Approx(0.5));
  CHECK_THROWS_AS(pearson(std::vector<double>{1}, std::vector<double>{1}), std::invalid_argument);
}

TEST_CASE("correlation over generated samples") {
  const auto samples = generate_dataset(DatasetKind::Complex, 27, 64, 2);
  const auto r = gamma_gap_correlation(samples);
  CHECK(r.n == 27);
  CHECK(r.full_reconstruction == 27);
  CHECK(r.min_rho == 100.0);
  CHECK(r.pearson_r > 0.5);
}

TEST_CASE("comparison records") {
  const auto samples = generate_dataset(DatasetKind::Simple, 2, 32, 5);
  HarnessOptions options;
  options.workers = 2;
  const auto report = run_comparison(samples, tiny_config(), options);
  CHECK(report.failures.empty());
  REQUIRE(report.records.size() == 6);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& raw = report.records[3 * i];
    CHECK(raw.method == Method::Raw);
    CHECK(raw.mse == mse(samples[i].degraded, samples[i].ground_truth));
    CHECK(raw.iou == iou(samples[i].degraded, samples[i].ground_truth));
    CHECK(report.records[3 * i + 1].method == Method::Dip);
    CHECK(report.records[3 * i + 2].method == Method::Dsp);
  }
  for (const auto& r : report.records) {
    CHECK(r.iou >= 0.0);
    CHECK(r.iou <= 1.0);
    CHECK(r.mse >= 0.0);
  }
  REQUIRE(report.summary.size() == 3);
  const auto& dsp_summary = report.summary[2];
  CHECK(dsp_summary.n == 2);
  CHECK(dsp_summary.mse == doctest::Approx((report.records[2].mse + report.records[5].mse) / 2));

  const auto path = temp_dir() / "comparison.csv";
  write_comparison_csv(path, report.records);
  CHECK(read_comparison_csv(path) == report.records);
}

TEST_CASE("failing samples are recorded, not fatal") {
  auto samples = generate_dataset(DatasetKind::Simple, 2, 32, 5);
  samples[1].degraded = BinaryImage(30, 30);  // not a multiple of 2^depth
  samples[1].ground_truth = BinaryImage(30, 30);
  const auto report = run_comparison(samples, tiny_config(), HarnessOptions{GammaPolicy::Fixed, 1});
  CHECK(report.records.size() == 3);
  REQUIRE(report.failures.size() == 1);
  CHECK(report.failures[0].id == samples[1].id);
}

TEST_CASE("alpha sweep shape and CSV round trip") {
  const auto samples = generate_dataset(DatasetKind::Simple, 2, 32, 6);
  const std::vector<double> alphas{0.0, 0.15, 1.0};
  const auto records = sweep_alpha(samples, alphas, tiny_config(), HarnessOptions{GammaPolicy::GroundTruth, 1});
  REQUIRE(records.size() == 3);
  CHECK(records[1].value == 0.15);
  CHECK(records[1].n == 2);
  const auto path = temp_dir() / "alpha.csv";
  write_alpha_csv(path, records);
  const auto back = read_alpha_csv(path);
  REQUIRE(back.size() == records.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    // n is not part of the CSV schema.
    auto expected = records[i];
    expected.n = back[i].n;
    CHECK(back[i] == expected);
  }
  const std::vector<double> bad{1.5};
  CHECK_THROWS_AS(sweep_alpha(samples, bad, tiny_config()), ConfigError);
}

TEST_CASE("receptive field sweep cells and CSV") {
  RfOptions rf;
  rf.kernels = {3, 5};
  rf.gap_lengths = {3};
  rf.trials = 2;
  rf.canvas = 32;
  const auto cells = sweep_receptive_field(rf, tiny_config(), HarnessOptions{GammaPolicy::DatasetMeanGap, 1});
  REQUIRE(cells.size() == 2);
  CHECK(cells[1].kernel == 5);
  CHECK(cells[1].trials == 2);
  const auto path = temp_dir() / "rf.csv";
  write_rf_csv(path, cells);
  CHECK(read_rf_csv(path) == cells);
  rf.kernels = {4};
  CHECK_THROWS_AS(sweep_receptive_field(rf, tiny_config()), ConfigError);
}

TEST_CASE("success criterion") {
  const auto samples = generate_dataset(DatasetKind::Simple, 1, 64, 9);
  const auto& s = samples[0];
  const auto shape = render_shape(s.shape, 64, 64);
  const DegradationSpec one_gap{1, 8.0, 3};
  const auto regions = gap_regions(shape, one_gap);
  const auto degraded = cut_gaps(shape, one_gap);
  CHECK(completion_succeeded(shape.image, shape.image, regions, 1.5));
  CHECK_FALSE(completion_succeeded(degraded, shape.image, regions, 1.5));
  CHECK_FALSE(completion_succeeded(BinaryImage(64, 64, 0.0f), shape.image, regions, 1.5));
}

TEST_CASE("dilation") {
  BinaryImage img(5, 5);
  img(0, 0) = 0.0f;
  img(2, 2) = 0.0f;
  const auto d = dilate(img);
  CHECK(d.dark_count() == 4 + 9 - 1);
  CHECK(d(1, 1) == 0.0f);
  CHECK(d(4, 4) == 1.0f);
}

TEST_CASE("worker pool") {
  std::vector<std::atomic<int>> hits(100);
  parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i]++; });
  CHECK(std::all_of(hits.begin(), hits.end(), [](const auto& h) { return h == 1; }));
  CHECK_THROWS_AS(parallel_for(10, 3, [](std::size_t i) { if (i == 7) throw std::runtime_error("x"); }),
                  std::runtime_error);

  CHECK(worker_count(3) == 3);
  ::setenv("DSP_WORKERS", "5", 1);
  CHECK(worker_count() == 5);
  ::setenv("DSP_WORKERS", "many", 1);
  CHECK_THROWS_AS(worker_count(), ConfigError);
  ::unsetenv("DSP_WORKERS");
  CHECK(worker_count() >= 1);
}

TEST_CASE("correlation JSON round trip") {
  const CorrelationResult r{0.93, 200, 200, 100.0};
  const auto path = temp_dir() / "correlation.json";
  write_correlation_json(path, r);
  const auto back = read_correlation_json(path);
  CHECK(back.pearson_r == r.pearson_r);
  CHECK(back.n == r.n);
}
