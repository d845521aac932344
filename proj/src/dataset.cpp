#include "dsp/dataset.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numbers>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "dsp/random.hpp"

namespace dsp {
namespace {

using json = nlohmann::json;

constexpr std::array<std::string_view, kShapeCategoryCount> kCategoryNames{
    "circle", "kite", "parallelogram", "rectangle", "rhombus",
    "square", "trapezoid", "triangle", "overlap"};

struct Vec2 {
  double x = 0.0;  // column
  double y = 0.0;  // row
};

std::uint64_t pixel_key(PixelPoint p) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(p.row)) << 32) |
         static_cast<std::uint32_t>(p.col);
}

// Closed outline in canvas coordinates, before rasterization.
std::vector<Vec2> outline(const ShapeGeometry& g, std::uint64_t seed) {
  Rng rng(seed);
  const double h = (g.scale - 1.0) / 2.0;
  const double a = g.aspect;
  std::vector<Vec2> local;
  switch (g.category) {
    case ShapeCategory::Circle: {
      // Low-order radial harmonics give the hand-drawn look without kinks.
      std::array<double, 3> amp{}, phase{};
      for (std::size_t k = 0; k < amp.size(); ++k) {
        amp[k] = rng.uniform(-g.jitter / 3.0, g.jitter / 3.0);
        phase[k] = rng.uniform(0.0, 2.0 * std::numbers::pi);
      }
      const int n = std::max(24, static_cast<int>(std::ceil(std::numbers::pi * h)));
      for (int i = 0; i < n; ++i) {
        const double t = 2.0 * std::numbers::pi * i / n;
        double r = 1.0;
        for (std::size_t k = 0; k < amp.size(); ++k)
          r += amp[k] / std::max(h, 1.0) * std::cos(static_cast<double>(k + 2) * t + phase[k]);
        local.push_back({h * r * std::cos(t), a * h * r * std::sin(t)});
      }
      break;
    }
    case ShapeCategory::Square:
      local = {{-h, -h}, {h, -h}, {h, h}, {-h, h}};
      break;
    case ShapeCategory::Rectangle:
      local = {{-h, -a * h}, {h, -a * h}, {h, a * h}, {-h, a * h}};
      break;
    case ShapeCategory::Rhombus:
      local = {{0, -h}, {a * h, 0}, {0, h}, {-a * h, 0}};
      break;
    case ShapeCategory::Kite:
      local = {{0, -h}, {a * h, -0.35 * h}, {0, h}, {-a * h, -0.35 * h}};
      break;
    case ShapeCategory::Parallelogram: {
      const double k = g.skew * h;
      local = {{-h + k, -a * h}, {h + k, -a * h}, {h - k, a * h}, {-h - k, a * h}};
      break;
    }
    case ShapeCategory::Trapezoid:
      local = {{-0.5 * h, -a * h}, {0.5 * h, -a * h}, {h, a * h}, {-h, a * h}};
      break;
    case ShapeCategory::Triangle:
      local = {{0, -h}, {0.866 * h, 0.5 * h}, {-0.866 * h, 0.5 * h}};
      break;
    case ShapeCategory::Overlap:
      throw DatasetError("overlap is a composition, not a part");
  }

  if (g.category != ShapeCategory::Circle) {
    if (g.jitter > 0.0) {
      for (auto& v : local) {
        v.x += rng.uniform(-g.jitter, g.jitter);
        v.y += rng.uniform(-g.jitter, g.jitter);
      }
    }
    if (g.wobble > 0.0) {
      std::vector<Vec2> wobbly;
      for (std::size_t i = 0; i < local.size(); ++i) {
        const Vec2 p = local[i], q = local[(i + 1) % local.size()];
        const double len = std::hypot(q.x - p.x, q.y - p.y);
        const int pieces = std::max(1, static_cast<int>(len / 10.0));
        wobbly.push_back(p);
        for (int s = 1; s < pieces; ++s) {
          const double t = static_cast<double>(s) / pieces;
          const double off = rng.uniform(-g.wobble, g.wobble);
          wobbly.push_back({p.x + t * (q.x - p.x) - off * (q.y - p.y) / len,
                            p.y + t * (q.y - p.y) + off * (q.x - p.x) / len});
        }
      }
      local = std::move(wobbly);
    }
  }

  const double c = std::cos(g.rotation), s = std::sin(g.rotation);
  std::vector<Vec2> out;
  out.reserve(local.size());
  for (const auto& v : local)
    out.push_back({g.center_col + c * v.x - s * v.y, g.center_row + s * v.x + c * v.y});
  return out;
}

PixelPoint round_point(Vec2 v) {
  return {static_cast<std::int32_t>(std::floor(v.y + 0.5)),
          static_cast<std::int32_t>(std::floor(v.x + 0.5))};
}

// Bresenham through the closed polygon; pixels already on the path are
// skipped so every centreline pixel appears once.
std::vector<PixelPoint> trace_polygon(const std::vector<Vec2>& vertices) {
  std::vector<PixelPoint> path;
  std::unordered_set<std::uint64_t> seen;
  const auto visit = [&](PixelPoint p) {
    if (seen.insert(pixel_key(p)).second) path.push_back(p);
  };
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    PixelPoint a = round_point(vertices[i]);
    const PixelPoint b = round_point(vertices[(i + 1) % vertices.size()]);
    const int dc = std::abs(b.col - a.col), dr = -std::abs(b.row - a.row);
    const int sc = a.col < b.col ? 1 : -1, sr = a.row < b.row ? 1 : -1;
    int err = dc + dr;
    while (true) {
      visit(a);
      if (a == b) break;
      const int e2 = 2 * err;
      if (e2 >= dr) {
        err += dr;
        a.col += sc;
      }
      if (e2 <= dc) {
        err += dc;
        a.row += sr;
      }
    }
  }
  return path;
}

struct Bounds {
  double min_row = 1e300, max_row = -1e300, min_col = 1e300, max_col = -1e300;
  void add(Vec2 v) {
    min_row = std::min(min_row, v.y);
    max_row = std::max(max_row, v.y);
    min_col = std::min(min_col, v.x);
    max_col = std::max(max_col, v.x);
  }
};

Bounds spec_bounds(const ShapeSpec& spec) {
  Bounds b;
  for (std::size_t i = 0; i < spec.parts.size(); ++i)
    for (const auto& v : outline(spec.parts[i], spec.seed + i)) b.add(v);
  return b;
}

// Owner (global centreline index) of every dark pixel: the nearest path
// pixel, ties to the lowest index.
std::vector<std::pair<PixelPoint, std::size_t>> pixel_owners(const RenderedShape& shape) {
  std::vector<PixelPoint> all;
  std::unordered_map<std::uint64_t, std::size_t> first_index;
  for (const auto& path : shape.paths)
    for (const auto& p : path) {
      first_index.emplace(pixel_key(p), all.size());
      all.push_back(p);
    }
  const KdTree tree(all);
  std::vector<std::pair<PixelPoint, std::size_t>> owners;
  const auto& img = shape.image;
  for (std::size_t r = 0; r < img.height(); ++r)
    for (std::size_t c = 0; c < img.width(); ++c) {
      if (!img.is_dark(r, c)) continue;
      const PixelPoint p{static_cast<std::int32_t>(r), static_cast<std::int32_t>(c)};
      const auto hit = tree.nearest(p);
      owners.emplace_back(p, first_index.at(pixel_key(tree.points()[hit->index])));
    }
  return owners;
}

json geometry_to_json(const ShapeGeometry& g) {
  return {{"category", to_string(g.category)}, {"center_row", g.center_row},
          {"center_col", g.center_col},        {"scale", g.scale},
          {"rotation", g.rotation},            {"aspect", g.aspect},
          {"skew", g.skew},                    {"jitter", g.jitter},
          {"wobble", g.wobble}};
}

ShapeGeometry geometry_from_json(const json& j) {
  ShapeGeometry g;
  const auto category = parse_shape_category(j.at("category").get<std::string>());
  if (!category) throw DatasetError("manifest: unknown category " + j.at("category").dump());
  g.category = *category;
  g.center_row = j.at("center_row");
  g.center_col = j.at("center_col");
  g.scale = j.at("scale");
  g.rotation = j.at("rotation");
  g.aspect = j.at("aspect");
  g.skew = j.at("skew");
  g.jitter = j.at("jitter");
  g.wobble = j.at("wobble");
  return g;
}

ShapeCategory random_part_category(Rng& rng) {
  return static_cast<ShapeCategory>(rng.uniform_int(0, static_cast<std::int64_t>(kShapeCategoryCount) - 2));
}

ShapeGeometry random_part(ShapeCategory category, DatasetKind kind, double scale, Rng& rng) {
  const bool complex = kind == DatasetKind::Complex;
  ShapeGeometry g;
  g.category = category;
  g.scale = scale;
  g.rotation = rng.uniform(0.0, std::numbers::pi);
  switch (category) {
    case ShapeCategory::Rectangle: g.aspect = rng.uniform(0.5, 0.8); break;
    case ShapeCategory::Rhombus: g.aspect = rng.uniform(0.55, 0.8); break;
    case ShapeCategory::Kite: g.aspect = rng.uniform(0.55, 0.8); break;
    case ShapeCategory::Parallelogram:
      g.aspect = rng.uniform(0.45, 0.7);
      g.skew = rng.uniform(0.2, 0.4);
      break;
    case ShapeCategory::Trapezoid: g.aspect = rng.uniform(0.55, 0.8); break;
    case ShapeCategory::Circle: g.aspect = complex ? rng.uniform(0.75, 1.0) : 1.0; break;
    default: break;
  }
  if (complex) {
    g.jitter = 0.05 * scale;
    g.wobble = rng.uniform(1.0, 2.5);
  }
  return g;
}

// Places the spec's bounding box uniformly inside the canvas with a margin,
// shrinking until it fits.
void place_inside(ShapeSpec& spec, std::size_t canvas, Rng& rng) {
  const double margin = spec.stroke_width + 2.0;
  for (int attempt = 0; attempt < 30; ++attempt) {
    const Bounds b = spec_bounds(spec);
    const double span_r = b.max_row - b.min_row, span_c = b.max_col - b.min_col;
    const double room_r = static_cast<double>(canvas) - 1.0 - 2.0 * margin - span_r;
    const double room_c = static_cast<double>(canvas) - 1.0 - 2.0 * margin - span_c;
    if (room_r >= 0.0 && room_c >= 0.0) {
      const double dr = margin + rng.uniform(0.0, room_r) - b.min_row;
      const double dc = margin + rng.uniform(0.0, room_c) - b.min_col;
      for (auto& p : spec.parts) {
        p.center_row += dr;
        p.center_col += dc;
      }
      return;
    }
    for (auto& p : spec.parts) {
      p.scale *= 0.9;
      p.center_row *= 0.9;
      p.center_col *= 0.9;
    }
  }
  throw DatasetError("shape does not fit the canvas");
}

DatasetSample random_sample(DatasetKind kind, std::size_t index, std::size_t canvas, Rng& rng) {
  const bool complex = kind == DatasetKind::Complex;
  const auto category = static_cast<ShapeCategory>(index % kShapeCategoryCount);
  const auto s = static_cast<double>(canvas);

  ShapeSpec shape;
  shape.category = category;
  shape.stroke_width = 1;
  shape.seed = rng.fork();
  if (category == ShapeCategory::Overlap) {
    const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double offset = rng.uniform(0.10, 0.16) * s;
    for (int k = 0; k < 2; ++k) {
      auto part = random_part(random_part_category(rng), kind, rng.uniform(0.32, 0.45) * s, rng);
      const double sign = k == 0 ? -0.5 : 0.5;
      part.center_row = sign * offset * std::sin(angle);
      part.center_col = sign * offset * std::cos(angle);
      shape.parts.push_back(part);
    }
  } else {
    shape.parts.push_back(random_part(category, kind, rng.uniform(0.40, complex ? 0.65 : 0.62) * s, rng));
  }
  place_inside(shape, canvas, rng);

  const RenderedShape rendered = render_shape(shape, canvas, canvas);
  const double length = static_cast<double>(rendered.contour_length());

  DegradationSpec degradation;
  degradation.seed = rng.fork();
  if (complex) {
    degradation.num_gaps = static_cast<int>(rng.uniform_int(3, 8));
    degradation.gap_length = static_cast<double>(rng.uniform_int(8, 14));
    while (degradation.num_gaps > 3 &&
           (degradation.num_gaps * degradation.gap_length > 0.4 * length ||
            3.0 * degradation.num_gaps * degradation.gap_length > length))
      --degradation.num_gaps;
  } else {
    degradation.num_gaps = static_cast<int>(rng.uniform_int(1, 3));
    degradation.gap_length = static_cast<double>(rng.uniform_int(5, 8));
    while (degradation.num_gaps > 1 && degradation.num_gaps * degradation.gap_length > 0.1 * length)
      --degradation.num_gaps;
    degradation.gap_length = std::min(degradation.gap_length, std::floor(0.1 * length));
  }

  std::string id = std::string(to_string(kind)) + "_" + std::to_string(index) + "_" +
                   std::string(to_string(category));
  return make_sample(std::move(id), shape, degradation, canvas);
}

}  // namespace

std::string_view to_string(ShapeCategory category) {
  return kCategoryNames.at(static_cast<std::size_t>(category));
}

std::optional<ShapeCategory> parse_shape_category(std::string_view name) {
  for (std::size_t i = 0; i < kCategoryNames.size(); ++i)
    if (kCategoryNames[i] == name) return static_cast<ShapeCategory>(i);
  return std::nullopt;
}

std::string_view to_string(DatasetKind kind) {
  return kind == DatasetKind::Simple ? "simple" : "complex";
}

std::optional<DatasetKind> parse_dataset_kind(std::string_view name) {
  if (name == "simple") return DatasetKind::Simple;
  if (name == "complex") return DatasetKind::Complex;
  return std::nullopt;
}

std::size_t RenderedShape::contour_length() const {
  std::size_t n = 0;
  for (const auto& p : paths) n += p.size();
  return n;
}

RenderedShape render_shape(const ShapeSpec& spec, std::size_t height, std::size_t width) {
  const std::size_t expected = spec.category == ShapeCategory::Overlap ? 2 : 1;
  if (spec.parts.size() != expected) {
    throw DatasetError(std::string(to_string(spec.category)) + " needs " +
                       std::to_string(expected) + " part(s), got " +
                       std::to_string(spec.parts.size()));
  }
  if (spec.stroke_width < 1) throw DatasetError("stroke_width must be >= 1");

  RenderedShape out{BinaryImage(height, width, 1.0f), {}, spec.stroke_width};
  const int w = spec.stroke_width;
  const int lo = -(w - 1) / 2, hi = w / 2;
  const auto h_i = static_cast<std::int32_t>(height), w_i = static_cast<std::int32_t>(width);
  for (std::size_t i = 0; i < spec.parts.size(); ++i) {
    if (spec.parts[i].category == ShapeCategory::Overlap) throw DatasetError("nested overlap");
    auto path = trace_polygon(outline(spec.parts[i], spec.seed + i));
    for (const auto& p : path) {
      for (int dr = lo; dr <= hi; ++dr)
        for (int dc = lo; dc <= hi; ++dc) {
          const std::int32_t r = p.row + dr, c = p.col + dc;
          if (r < w || c < w || r >= h_i - w || c >= w_i - w) {
            throw DatasetError("shape leaves the canvas margin at (" + std::to_string(r) + ", " +
                               std::to_string(c) + ")");
          }
          out.image(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) = 0.0f;
        }
    }
    out.paths.push_back(std::move(path));
  }
  return out;
}

std::vector<std::vector<PixelPoint>> gap_regions(const RenderedShape& shape,
                                                 const DegradationSpec& spec) {
  if (spec.num_gaps < 0) throw DatasetError("num_gaps must be >= 0");
  if (spec.num_gaps == 0) return {};
  const auto gap = static_cast<std::size_t>(std::max(1.0, std::round(spec.gap_length)));
  const std::size_t total = shape.contour_length();
  const auto gaps = static_cast<std::size_t>(spec.num_gaps);
  if (gap * gaps >= total || 3 * gap * gaps > total) {
    throw DatasetError("cannot cut " + std::to_string(gaps) + " gaps of " + std::to_string(gap) +
                       " px from a contour of " + std::to_string(total) + " px");
  }

  struct Placement {
    std::size_t path = 0;
    std::size_t start = 0;
  };
  Rng rng(spec.seed);
  std::vector<Placement> placed;
  const auto cyclic = [](std::size_t a, std::size_t b, std::size_t n) {
    const std::size_t d = a > b ? a - b : b - a;
    return std::min(d, n - d);
  };
  for (int restart = 0; restart < 100 && placed.size() < gaps; ++restart) {
    placed.clear();
    while (placed.size() < gaps) {
      bool ok = false;
      for (int attempt = 0; attempt < 200 && !ok; ++attempt) {
        auto u = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(total) - 1));
        Placement cand;
        while (u >= shape.paths[cand.path].size()) u -= shape.paths[cand.path++].size();
        cand.start = u;
        const std::size_t n = shape.paths[cand.path].size();
        if (n < 3 * gap) continue;
        ok = std::all_of(placed.begin(), placed.end(), [&](const Placement& p) {
          return p.path != cand.path || cyclic(p.start, cand.start, n) >= 3 * gap;
        });
        if (ok) placed.push_back(cand);
      }
      if (!ok) break;
    }
  }
  if (placed.size() < gaps) {
    throw DatasetError("could not place " + std::to_string(gaps) + " non-overlapping gaps");
  }

  std::vector<std::size_t> path_offset{0};
  for (const auto& p : shape.paths) path_offset.push_back(path_offset.back() + p.size());
  std::vector<int> gap_of(total, -1);
  for (std::size_t k = 0; k < placed.size(); ++k) {
    const std::size_t n = shape.paths[placed[k].path].size();
    for (std::size_t i = 0; i < gap; ++i)
      gap_of[path_offset[placed[k].path] + (placed[k].start + i) % n] = static_cast<int>(k);
  }
  std::vector<std::vector<PixelPoint>> regions(gaps);
  for (const auto& [pixel, owner] : pixel_owners(shape))
    if (gap_of[owner] >= 0) regions[static_cast<std::size_t>(gap_of[owner])].push_back(pixel);
  return regions;
}

BinaryImage cut_gaps(const RenderedShape& shape, const DegradationSpec& spec) {
  BinaryImage out = shape.image;
  for (const auto& region : gap_regions(shape, spec))
    for (const auto& p : region) out(static_cast<std::size_t>(p.row), static_cast<std::size_t>(p.col)) = 1.0f;
  return out;
}

DatasetSample make_sample(std::string id, const ShapeSpec& shape, const DegradationSpec& degradation,
                          std::size_t canvas) {
  const RenderedShape rendered = render_shape(shape, canvas, canvas);
  DatasetSample sample;
  sample.id = std::move(id);
  sample.ground_truth = rendered.image;
  sample.degraded = cut_gaps(rendered, degradation);
  sample.gap_stat = gap_metric(sample.ground_truth, sample.degraded);
  sample.shape = shape;
  sample.degradation = degradation;
  return sample;
}

std::vector<DatasetSample> generate_dataset(DatasetKind kind, std::size_t count,
                                            std::size_t canvas, std::uint64_t seed) {
  if (canvas < 32) throw DatasetError("canvas must be at least 32 px");
  Rng rng(seed);
  std::vector<DatasetSample> samples;
  samples.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Rng sample_rng(rng.fork());
    for (int attempt = 0;; ++attempt) {
      try {
        samples.push_back(random_sample(kind, i, canvas, sample_rng));
        break;
      } catch (const DatasetError&) {
        if (attempt >= 50) throw;
      }
    }
  }
  return samples;
}

void write_dataset(const std::filesystem::path& directory, std::string_view name,
                   const std::vector<DatasetSample>& samples) {
  const auto dir = directory / std::string(name);
  std::filesystem::create_directories(dir);
  json manifest;
  manifest["dataset"] = std::string(name);
  manifest["samples"] = json::array();
  for (const auto& s : samples) {
    write_png(dir / (s.id + "_gt.png"), s.ground_truth);
    write_png(dir / (s.id + "_degraded.png"), s.degraded);
    json parts = json::array();
    for (const auto& p : s.shape.parts) parts.push_back(geometry_to_json(p));
    manifest["samples"].push_back({
        {"id", s.id},
        {"category", to_string(s.shape.category)},
        {"ground_truth", s.id + "_gt.png"},
        {"degraded", s.id + "_degraded.png"},
        {"gap", {{"phi_gt", s.gap_stat.phi_gt},
                 {"phi_incomplete", s.gap_stat.phi_incomplete},
                 {"gap", s.gap_stat.gap}}},
        {"shape", {{"parts", parts}, {"stroke_width", s.shape.stroke_width}, {"seed", s.shape.seed}}},
        {"degradation", {{"num_gaps", s.degradation.num_gaps},
                         {"gap_length", s.degradation.gap_length},
                         {"seed", s.degradation.seed}}},
    });
  }
  std::ofstream out(dir / "manifest.json");
  if (!out) throw DatasetError("cannot write " + (dir / "manifest.json").string());
  out << manifest.dump(2) << '\n';
}

std::vector<DatasetSample> load_dataset(const std::filesystem::path& directory) {
  const auto path = directory / "manifest.json";
  std::ifstream in(path);
  if (!in) throw DatasetError("missing manifest: " + path.string());
  json manifest;
  try {
    manifest = json::parse(in);
  } catch (const json::exception& e) {
    throw DatasetError("malformed manifest " + path.string() + ": " + e.what());
  }
  std::vector<DatasetSample> samples;
  try {
    for (const auto& entry : manifest.at("samples")) {
      DatasetSample s;
      s.id = entry.at("id");
      s.ground_truth = read_png(directory / entry.at("ground_truth").get<std::string>());
      s.degraded = read_png(directory / entry.at("degraded").get<std::string>());
      s.gap_stat = gap_metric(s.ground_truth, s.degraded);
      const auto category = parse_shape_category(entry.at("category").get<std::string>());
      if (!category) throw DatasetError("manifest: unknown category in " + s.id);
      s.shape.category = *category;
      for (const auto& p : entry.at("shape").at("parts")) s.shape.parts.push_back(geometry_from_json(p));
      s.shape.stroke_width = entry.at("shape").at("stroke_width");
      s.shape.seed = entry.at("shape").at("seed");
      s.degradation.num_gaps = entry.at("degradation").at("num_gaps");
      s.degradation.gap_length = entry.at("degradation").at("gap_length");
      s.degradation.seed = entry.at("degradation").at("seed");
      samples.push_back(std::move(s));
    }
  } catch (const json::exception& e) {
    throw DatasetError("malformed manifest " + path.string() + ": " + e.what());
  }
  return samples;
}

}  // namespace dsp
