#include <doctest.h>

#include <cmath>

#include "dsp/dataset.hpp"
#include "dsp/errors.hpp"
#include "dsp/kdtree.hpp"
#include "dsp/random.hpp"
#include "dsp/scores.hpp"

using namespace dsp;

namespace {

BinaryImage with_points(std::size_t h, std::size_t w, std::initializer_list<PixelPoint> points) {
  BinaryImage img(h, w);
  for (auto p : points) img(p.row, p.col) = 0.0f;
  return img;
}

}  // namespace

TEST_CASE("k-d tree agrees with exhaustive search, ties included") {
  Rng rng(1);
  for (int trial = 0; trial < 60; ++trial) {
    const auto n = static_cast<std::size_t>(rng.uniform_int(1, 200));
    const int extent = static_cast<int>(rng.uniform_int(3, 40));  // small extents force ties and duplicates
    std::vector<PixelPoint> points(n);
    for (auto& p : points)
      p = {static_cast<int>(rng.uniform_int(0, extent)), static_cast<int>(rng.uniform_int(0, extent))};
    const KdTree tree(points);
    for (int q = 0; q < 50; ++q) {
      const PixelPoint query{static_cast<int>(rng.uniform_int(-5, extent + 5)),
                             static_cast<int>(rng.uniform_int(-5, extent + 5))};
      const auto fast = tree.nearest(query);
      const auto slow = nearest_exhaustive(tree.points(), query);
      REQUIRE(fast.has_value());
      CHECK(fast->index == slow->index);
      CHECK(fast->squared_distance == slow->squared_distance);
      for (double r : {0.0, 1.0, 1.5, 3.0})
        CHECK(tree.any_within(query, r) == (static_cast<double>(slow->squared_distance) <= r * r));
    }
  }
}

TEST_CASE("empty tree") {
  const KdTree tree;
  CHECK_FALSE(tree.nearest({0, 0}).has_value());
  CHECK_FALSE(tree.any_within({0, 0}, 10.0));
}

TEST_CASE("match radius is inclusive") {
  const KdTree tree(std::vector<PixelPoint>{{0, 0}});
  CHECK(tree.any_within({0, 1}, 1.0));
  CHECK(tree.any_within({1, 1}, 1.5));
  CHECK_FALSE(tree.any_within({0, 2}, 1.5));
}

TEST_CASE("scores of an image against itself") {
  const auto samples = generate_dataset(DatasetKind::Complex, 9, 64, 3);
  const ScoreConfig cfg;
  for (const auto& s : samples) {
    CHECK(reconstruction_score(s.ground_truth, s.ground_truth, cfg) == 100.0);
    CHECK(overfit_score(s.ground_truth, s.ground_truth, cfg) == 0.0);
  }
  for (double g : {0.0, 5.0, 23.0}) CHECK(dissimilarity(100.0, g, g) == 0.0);
  CHECK(dissimilarity(97.0, 9.0, 5.0) == doctest::Approx(5.0));
}

TEST_CASE("overfit score counts novel output points") {
  // Incomplete image: a horizontal run of 5 pixels. Output: the same run plus
  // 2 far-away points, so 2 of 7 output points are novel.
  const auto incomplete = with_points(20, 20, {{5, 2}, {5, 3}, {5, 4}, {5, 5}, {5, 6}});
  auto output = incomplete;
  output(15, 15) = 0.0f;
  output(15, 2) = 0.0f;
  const ScoreConfig cfg;
  CHECK(overfit_score(output, incomplete, cfg) == doctest::Approx(200.0 / 7.0));
  CHECK(reconstruction_score(output, incomplete, cfg) == 100.0);
  // Dropping two incomplete-image points that have no neighbour left within 1.5.
  auto partial = with_points(20, 20, {{5, 2}, {5, 3}, {5, 4}});
  CHECK(reconstruction_score(partial, incomplete, cfg) == doctest::Approx(80.0));
}

TEST_CASE("vacuous sets") {
  const BinaryImage blank(8, 8);
  const auto dot = with_points(8, 8, {{3, 3}});
  const ScoreConfig cfg;
  CHECK(reconstruction_score(dot, blank, cfg) == 100.0);
  CHECK(overfit_score(blank, dot, cfg) == 0.0);
  CHECK(reconstruction_score(blank, dot, cfg) == 0.0);
  CHECK_THROWS_AS(gap_metric(blank, blank), std::invalid_argument);
}

TEST_CASE("gap metric") {
  const auto gt = with_points(10, 10, {{1, 1}, {1, 2}, {1, 3}, {1, 4}});
  const auto degraded = with_points(10, 10, {{1, 1}, {1, 2}, {1, 3}});
  const auto stat = gap_metric(gt, degraded);
  CHECK(stat.phi_gt == 4);
  CHECK(stat.phi_incomplete == 3);
  CHECK(stat.gap == 0.25);
}

TEST_CASE("point extraction and validation") {
  BinaryImage img(4, 4);
  img(1, 2) = 0.3f;
  img(2, 2) = 0.7f;
  CHECK(extract_points(img, 0.5f).size() == 1);
  CHECK(extract_points(img, 0.8f).size() == 2);
  CHECK_THROWS_AS(PointSet(4, 4, {{4, 0}}), std::out_of_range);
  ScoreConfig bad;
  bad.match_radius = 0.0;
  CHECK_THROWS_AS(validate(bad), ConfigError);
  bad = {};
  bad.binarize_threshold = 1.0f;
  CHECK_THROWS_AS(validate(bad), ConfigError);
}
