#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dsp/image.hpp"
#include "dsp/kdtree.hpp"
#include "dsp/scores.hpp"

namespace dsp {

enum class ShapeCategory {
  Circle,
  Kite,
  Parallelogram,
  Rectangle,
  Rhombus,
  Square,
  Trapezoid,
  Triangle,
  Overlap,
};

inline constexpr std::size_t kShapeCategoryCount = 9;

std::string_view to_string(ShapeCategory category);
std::optional<ShapeCategory> parse_shape_category(std::string_view name);

/// One closed outline. Lengths are in pixels; `scale` is the extent between
/// the outermost pixel centres along the shape's main axis plus one, so an
/// axis-aligned square of scale s covers s x s pixels.
struct ShapeGeometry {
  ShapeCategory category = ShapeCategory::Square;  // never Overlap
  double center_row = 0.0;
  double center_col = 0.0;
  double scale = 32.0;
  double rotation = 0.0;  // radians
  double aspect = 1.0;    // secondary / main axis
  double skew = 0.0;      // parallelogram shear, fraction of the half width
  double jitter = 0.0;    // max vertex displacement
  double wobble = 0.0;    // max perpendicular displacement of edge midpoints
};

struct ShapeSpec {
  ShapeCategory category = ShapeCategory::Square;
  /// One part, or two for Overlap.
  std::vector<ShapeGeometry> parts;
  int stroke_width = 1;
  std::uint64_t seed = 0;  // jitter / wobble stream
};

struct DegradationSpec {
  int num_gaps = 0;
  double gap_length = 0.0;  // pixels of centreline removed per gap
  std::uint64_t seed = 0;
};

/// Raster plus the ordered centreline of every closed outline.
struct RenderedShape {
  BinaryImage image;
  std::vector<std::vector<PixelPoint>> paths;
  int stroke_width = 1;

  std::size_t contour_length() const;
};

class DatasetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Rasterizes the closed outline(s) with hard edges. Throws DatasetError
/// when any stroke pixel would come closer than stroke_width to the border.
RenderedShape render_shape(const ShapeSpec& spec, std::size_t height, std::size_t width);

/// Removes num_gaps runs of gap_length centreline pixels (and the stroke
/// pixels they own), keeping at least 2 * gap_length of contour between
/// gaps. Throws DatasetError when the gaps cannot be placed.
BinaryImage cut_gaps(const RenderedShape& shape, const DegradationSpec& spec);

/// The pixel sets removed by each gap, in placement order. cut_gaps() is
/// the ground truth minus their union.
std::vector<std::vector<PixelPoint>> gap_regions(const RenderedShape& shape,
                                                 const DegradationSpec& spec);

enum class DatasetKind { Simple, Complex };

std::string_view to_string(DatasetKind kind);
std::optional<DatasetKind> parse_dataset_kind(std::string_view name);

struct DatasetSample {
  std::string id;
  BinaryImage ground_truth;
  BinaryImage degraded;
  GapStat gap_stat;
  ShapeSpec shape;
  DegradationSpec degradation;
};

/// Simple: regular shapes, 1-3 short gaps, total gap at most 10% of the
/// contour. Complex: jittered, wobbly outlines with 3-8 longer gaps.
/// Categories cycle in enum order.
std::vector<DatasetSample> generate_dataset(DatasetKind kind, std::size_t count,
                                            std::size_t canvas, std::uint64_t seed);

/// Builds one sample from explicit specs.
DatasetSample make_sample(std::string id, const ShapeSpec& shape, const DegradationSpec& degradation,
                          std::size_t canvas);

/// <root>/<name>/<id>_gt.png, <id>_degraded.png and manifest.json.
void write_dataset(const std::filesystem::path& directory, std::string_view name,
                   const std::vector<DatasetSample>& samples);

/// Reads a directory written by write_dataset (the one holding
/// manifest.json). Throws DatasetError when the manifest is missing.
std::vector<DatasetSample> load_dataset(const std::filesystem::path& directory);

}  // namespace dsp
