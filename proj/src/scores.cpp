#include "dsp/scores.hpp"

#include <cmath>
#include <string>

#include "dsp/errors.hpp"

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

PointSet::PointSet(std::size_t height, std::size_t width, std::vector<PixelPoint> points)
    : height_(height), width_(width) {
  for (const auto& p : points) {
    if (p.row < 0 || p.col < 0 || static_cast<std::size_t>(p.row) >= height ||
        static_cast<std::size_t>(p.col) >= width) {
      throw std::out_of_range("point (" + std::to_string(p.row) + ", " + std::to_string(p.col) +
                              ") outside " + std::to_string(height) + "x" + std::to_string(width));
    }
  }
  index_ = KdTree(std::move(points));
}

void validate(const ScoreConfig& config) {
  if (!(config.binarize_threshold > 0.0f && config.binarize_threshold < 1.0f)) {
    throw ConfigError("scores: binarize_threshold must be in (0, 1)");
  }
  if (!(config.match_radius > 0.0)) throw ConfigError("scores: match_radius must be > 0");
  if (!(config.gamma >= 0.0)) throw ConfigError("scores: gamma must be >= 0");
}

PointSet extract_points(const BinaryImage& image, float threshold) {
  std::vector<PixelPoint> points;
  for (std::size_t r = 0; r < image.height(); ++r)
    for (std::size_t c = 0; c < image.width(); ++c)
      if (image(r, c) < threshold)
        points.push_back({static_cast<std::int32_t>(r), static_cast<std::int32_t>(c)});
  return PointSet(image.height(), image.width(), std::move(points));
}

double coverage_percent(const PointSet& reference, const PointSet& candidate, double radius) {
  if (reference.empty()) return 100.0;
  std::size_t matched = 0;
  for (const auto& p : reference.points())
    if (candidate.index().any_within(p, radius)) ++matched;
  return 100.0 * static_cast<double>(matched) / static_cast<double>(reference.size());
}

double reconstruction_score(const PointSet& output, const PointSet& incomplete, double radius) {
  return coverage_percent(incomplete, output, radius);
}

double overfit_score(const PointSet& output, const PointSet& incomplete, double radius) {
  if (output.empty()) return 0.0;
  return 100.0 - coverage_percent(output, incomplete, radius);
}

double reconstruction_score(const BinaryImage& output, const BinaryImage& incomplete,
                            const ScoreConfig& config) {
  require_same_dims("reconstruction_score", output, incomplete);
  return reconstruction_score(extract_points(output, config.binarize_threshold),
                              extract_points(incomplete, config.binarize_threshold),
                              config.match_radius);
}

double overfit_score(const BinaryImage& output, const BinaryImage& incomplete,
                     const ScoreConfig& config) {
  require_same_dims("overfit_score", output, incomplete);
  return overfit_score(extract_points(output, config.binarize_threshold),
                       extract_points(incomplete, config.binarize_threshold), config.match_radius);
}

double dissimilarity(double rho, double omega, double gamma) {
  return std::hypot(rho - 100.0, omega - gamma);
}

GapStat gap_metric(const BinaryImage& ground_truth, const BinaryImage& incomplete, float threshold) {
  require_same_dims("gap_metric", ground_truth, incomplete);
  GapStat stat;
  stat.phi_gt = ground_truth.dark_count(threshold);
  stat.phi_incomplete = incomplete.dark_count(threshold);
  if (stat.phi_gt == 0) throw std::invalid_argument("gap_metric: ground truth has no contour pixels");
  stat.gap = (static_cast<double>(stat.phi_gt) - static_cast<double>(stat.phi_incomplete)) /
             static_cast<double>(stat.phi_gt);
  return stat;
}

}  // namespace dsp
