#include "dsp/kdtree.hpp"

#include <algorithm>
#include <cmath>

namespace dsp {
namespace {

std::int32_t coord(PixelPoint p, int axis) { return axis == 0 ? p.row : p.col; }

bool better(const Neighbor& candidate, const Neighbor& best) {
  return candidate.squared_distance < best.squared_distance ||
         (candidate.squared_distance == best.squared_distance && candidate.index < best.index);
}

}  // namespace

KdTree::KdTree(std::vector<PixelPoint> points) : points_(std::move(points)) {
  build(0, points_.size(), 0);
}

void KdTree::build(std::size_t lo, std::size_t hi, int axis) {
  if (hi - lo <= 1) return;
  const std::size_t mid = lo + (hi - lo) / 2;
  const int other = 1 - axis;
  std::nth_element(points_.begin() + static_cast<std::ptrdiff_t>(lo),
                   points_.begin() + static_cast<std::ptrdiff_t>(mid),
                   points_.begin() + static_cast<std::ptrdiff_t>(hi),
                   [axis, other](PixelPoint a, PixelPoint b) {
                     return coord(a, axis) != coord(b, axis) ? coord(a, axis) < coord(b, axis)
                                                             : coord(a, other) < coord(b, other);
                   });
  build(lo, mid, other);
  build(mid + 1, hi, other);
}

void KdTree::search(std::size_t lo, std::size_t hi, int axis, PixelPoint q, Neighbor& best,
                    bool& found) const {
  if (lo >= hi) return;
  const std::size_t mid = lo + (hi - lo) / 2;
  const Neighbor here{mid, squared_distance(points_[mid], q)};
  if (!found || better(here, best)) {
    best = here;
    found = true;
  }
  const std::int64_t diff = coord(q, axis) - coord(points_[mid], axis);
  const int other = 1 - axis;
  // Left subrange holds coordinates <= split, right holds >= split.
  if (diff <= 0) {
    search(lo, mid, other, q, best, found);
    if (diff * diff <= best.squared_distance) search(mid + 1, hi, other, q, best, found);
  } else {
    search(mid + 1, hi, other, q, best, found);
    if (diff * diff <= best.squared_distance) search(lo, mid, other, q, best, found);
  }
}

std::optional<Neighbor> KdTree::nearest(PixelPoint query) const {
  if (points_.empty()) return std::nullopt;
  Neighbor best;
  bool found = false;
  search(0, points_.size(), 0, query, best, found);
  return best;
}

bool KdTree::any_within(PixelPoint query, double radius) const {
  const auto hit = nearest(query);
  return hit && static_cast<double>(hit->squared_distance) <= radius * radius;
}

std::optional<Neighbor> nearest_exhaustive(std::span<const PixelPoint> points, PixelPoint query) {
  if (points.empty()) return std::nullopt;
  Neighbor best{0, squared_distance(points[0], query)};
  for (std::size_t i = 1; i < points.size(); ++i) {
    const Neighbor candidate{i, squared_distance(points[i], query)};
    if (better(candidate, best)) best = candidate;
  }
  return best;
}

}  // namespace dsp
