#pragma once

#include <cstddef>

#include "dsp/image.hpp"
#include "dsp/kdtree.hpp"

namespace dsp {

/// Contour pixels of an image plus a nearest-neighbour index over them.
class PointSet {
 public:
  PointSet() = default;
  PointSet(std::size_t height, std::size_t width, std::vector<PixelPoint> points);

  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  std::size_t size() const { return index_.size(); }
  bool empty() const { return index_.empty(); }
  std::span<const PixelPoint> points() const { return index_.points(); }
  const KdTree& index() const { return index_; }

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  KdTree index_;
};

struct ScoreConfig {
  float binarize_threshold = 0.5f;
  /// A point "is in" the other set when a point of that set lies within
  /// this distance (inclusive). 1.5 covers the 8-neighbourhood.
  double match_radius = 1.5;
  /// Target overfit score for the dissimilarity.
  double gamma = 5.0;
};

void validate(const ScoreConfig& config);

/// Pixels with value < threshold.
PointSet extract_points(const BinaryImage& image, float threshold = 0.5f);

/// Percentage of `reference` points with an `candidate` point within radius.
/// 100 when `reference` is empty.
double coverage_percent(const PointSet& reference, const PointSet& candidate, double radius);

/// rho: percentage of the incomplete image's contour points reproduced by
/// the output. 100 when the incomplete image has no points.
double reconstruction_score(const BinaryImage& output, const BinaryImage& incomplete,
                            const ScoreConfig& config);
double reconstruction_score(const PointSet& output, const PointSet& incomplete, double radius);

/// omega: percentage of the output's contour points that have no incomplete
/// image point nearby. 0 when the output has no points.
double overfit_score(const BinaryImage& output, const BinaryImage& incomplete,
                     const ScoreConfig& config);
double overfit_score(const PointSet& output, const PointSet& incomplete, double radius);

/// delta = sqrt((rho - 100)^2 + (omega - gamma)^2)
double dissimilarity(double rho, double omega, double gamma);

struct GapStat {
  std::size_t phi_gt = 0;
  std::size_t phi_incomplete = 0;
  double gap = 0.0;
};

/// Fraction of ground-truth contour pixels missing from the incomplete
/// image. Throws std::invalid_argument when the ground truth has no dark
/// pixel.
GapStat gap_metric(const BinaryImage& ground_truth, const BinaryImage& incomplete,
                   float threshold = 0.5f);

}  // namespace dsp
