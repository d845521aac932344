#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace dsp {

struct PixelPoint {
  std::int32_t row = 0;
  std::int32_t col = 0;
  bool operator==(const PixelPoint&) const = default;
};

inline std::int64_t squared_distance(PixelPoint a, PixelPoint b) {
  const std::int64_t dr = a.row - b.row, dc = a.col - b.col;
  return dr * dr + dc * dc;
}

struct Neighbor {
  std::size_t index = 0;  // into the tree's point list
  std::int64_t squared_distance = 0;
};

/// Static 2-d tree over integer pixel coordinates. The tree is stored
/// implicitly: points are permuted so that each subrange's median is its
/// splitting node.
class KdTree {
 public:
  KdTree() = default;
  explicit KdTree(std::vector<PixelPoint> points);

  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  /// Points in tree order (a permutation of the constructor input).
  std::span<const PixelPoint> points() const { return points_; }

  /// Closest point; ties resolve to the lowest tree-order index. Empty tree
  /// gives nullopt.
  std::optional<Neighbor> nearest(PixelPoint query) const;

  /// True when some point lies within `radius` (inclusive).
  bool any_within(PixelPoint query, double radius) const;

 private:
  void build(std::size_t lo, std::size_t hi, int axis);
  void search(std::size_t lo, std::size_t hi, int axis, PixelPoint q, Neighbor& best,
              bool& found) const;

  std::vector<PixelPoint> points_;
};

/// Linear-scan nearest neighbour with the same tie rule, for checking the
/// tree.
std::optional<Neighbor> nearest_exhaustive(std::span<const PixelPoint> points, PixelPoint query);

}  // namespace dsp
