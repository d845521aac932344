#include "dsp/run_config.hpp"

#include <fstream>
#include <string>

#include "dsp/errors.hpp"

namespace dsp {
namespace {

using nlohmann::json;

/// Reads keys out of one JSON object and complains about leftovers.
class ObjectReader {
 public:
  ObjectReader(const json& object, std::string path) : object_(object), path_(std::move(path)) {
    if (!object_.is_object()) throw ConfigError(where() + "expected an object");
  }

  template <typename T>
  void read(const char* key, T& out) {
    const auto it = object_.find(key);
    if (it == object_.end()) return;
    ++consumed_;
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (!it->is_boolean()) throw ConfigError("expected a boolean");
      } else if constexpr (std::is_integral_v<T>) {
        if (!it->is_number_integer()) throw ConfigError("expected an integer");
        if constexpr (std::is_unsigned_v<T>) {
          if (it->is_number_integer() && !it->is_number_unsigned() && it->get<long long>() < 0)
            throw ConfigError("expected a non-negative integer");
        }
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!it->is_number()) throw ConfigError("expected a number");
      }
      out = it->get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(where(key) + e.what());
    } catch (const ConfigError& e) {
      throw ConfigError(where(key) + e.what());
    }
  }

  const json* child(const char* key) {
    const auto it = object_.find(key);
    if (it == object_.end()) return nullptr;
    ++consumed_;
    return &*it;
  }

  std::string path(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

  void finish(std::initializer_list<const char*> known) const {
    if (consumed_ == object_.size()) return;
    for (const auto& [key, value] : object_.items()) {
      bool found = false;
      for (const char* k : known) found = found || key == k;
      if (!found) throw ConfigError("config: unknown key '" + path(key.c_str()) + "'");
    }
  }

 private:
  std::string where(const char* key = nullptr) const {
    return "config: " + (key ? path(key) : (path_.empty() ? std::string("<root>") : path_)) + ": ";
  }

  const json& object_;
  std::string path_;
  std::size_t consumed_ = 0;
};

void read_generator(const json& j, GeneratorConfig& g) {
  ObjectReader r(j, "generator");
  r.read("depth", g.depth);
  r.read("down_channels", g.down_channels);
  r.read("up_channels", g.up_channels);
  r.read("skip_channels", g.skip_channels);
  r.read("main_kernel", g.main_kernel);
  r.read("skip_kernel", g.skip_kernel);
  r.read("noise_channels", g.noise_channels);
  r.read("output_channels", g.output_channels);
  r.read("activation_slope", g.activation_slope);
  r.read("normalize", g.normalize);
  r.finish({"depth", "down_channels", "up_channels", "skip_channels", "main_kernel", "skip_kernel",
            "noise_channels", "output_channels", "activation_slope", "normalize"});
}

void read_energy(const json& j, EnergyConfig& e) {
  ObjectReader r(j, "energy");
  r.read("alpha", e.alpha);
  std::string variant(to_string(e.variant));
  r.read("variant", variant);
  if (variant == "dsp") {
    e.variant = EnergyVariant::Dsp;
  } else if (variant == "dip_self_mask") {
    e.variant = EnergyVariant::DipSelfMask;
  } else {
    throw ConfigError("config: energy.variant: unknown variant '" + variant + "'");
  }
  r.finish({"alpha", "variant"});
}

void read_scores(const json& j, ScoreConfig& s) {
  ObjectReader r(j, "scores");
  r.read("binarize_threshold", s.binarize_threshold);
  r.read("match_radius", s.match_radius);
  r.read("gamma", s.gamma);
  r.finish({"binarize_threshold", "match_radius", "gamma"});
}

}  // namespace

std::string_view to_string(EnergyVariant variant) {
  return variant == EnergyVariant::Dsp ? "dsp" : "dip_self_mask";
}

nlohmann::json to_json(const RunConfig& c) {
  const auto& g = c.generator;
  return {
      {"generator",
       {{"depth", g.depth},
        {"down_channels", g.down_channels},
        {"up_channels", g.up_channels},
        {"skip_channels", g.skip_channels},
        {"main_kernel", g.main_kernel},
        {"skip_kernel", g.skip_kernel},
        {"noise_channels", g.noise_channels},
        {"output_channels", g.output_channels},
        {"activation_slope", g.activation_slope},
        {"normalize", g.normalize}}},
      {"energy", {{"alpha", c.energy.alpha}, {"variant", std::string(to_string(c.energy.variant))}}},
      {"scores",
       {{"binarize_threshold", c.scores.binarize_threshold},
        {"match_radius", c.scores.match_radius},
        {"gamma", c.scores.gamma}}},
      {"max_iterations", c.max_iterations},
      {"learning_rate", c.learning_rate},
      {"score_every", c.score_every},
      {"snapshot_every", c.snapshot_every},
      {"seed", c.seed},
  };
}

RunConfig run_config_from_json(const nlohmann::json& j, const RunConfig& base) {
  RunConfig c = base;
  ObjectReader r(j, "");
  if (const auto* g = r.child("generator")) read_generator(*g, c.generator);
  if (const auto* e = r.child("energy")) read_energy(*e, c.energy);
  if (const auto* s = r.child("scores")) read_scores(*s, c.scores);
  r.read("max_iterations", c.max_iterations);
  r.read("learning_rate", c.learning_rate);
  r.read("score_every", c.score_every);
  r.read("snapshot_every", c.snapshot_every);
  r.read("seed", c.seed);
  r.finish({"generator", "energy", "scores", "max_iterations", "learning_rate", "score_every",
            "snapshot_every", "seed"});
  validate(c);
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path, const RunConfig& base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config: " + path.string() + ": " + e.what());
  }
  return run_config_from_json(j, base);
}

RunConfig desk_scale_config() {
  RunConfig c;
  c.generator.depth = 4;
  c.generator.down_channels = 32;
  c.generator.up_channels = 32;
  c.generator.skip_channels = 16;
  c.max_iterations = 500;
  return c;
}

}  // namespace dsp
