#include <doctest.h>

#include <fstream>

#include "dsp/errors.hpp"
#include "dsp/run_config.hpp"

using namespace dsp;
using nlohmann::json;

TEST_CASE("round trip through JSON") {
  RunConfig c = desk_scale_config();
  c.energy.alpha = 0.05;
  c.energy.variant = EnergyVariant::DipSelfMask;
  c.scores.gamma = 12.5;
  c.seed = 42;
  c.generator.normalize = false;
  const RunConfig back = run_config_from_json(to_json(c));
  CHECK(to_json(back) == to_json(c));
  CHECK(back.generator.depth == 4);
  CHECK(back.energy.variant == EnergyVariant::DipSelfMask);
}

TEST_CASE("partial objects overlay the base") {
  const auto c = run_config_from_json(json::parse(R"({"energy": {"alpha": 0.5}, "seed": 9})"));
  CHECK(c.energy.alpha == 0.5);
  CHECK(c.seed == 9);
  CHECK(c.generator.depth == RunConfig{}.generator.depth);
}

TEST_CASE("unknown keys are rejected with their path") {
  CHECK_THROWS_WITH_AS(run_config_from_json(json::parse(R"({"iterations": 5})")),
                       doctest::Contains("'iterations'"), ConfigError);
  CHECK_THROWS_WITH_AS(run_config_from_json(json::parse(R"({"generator": {"layers": 5}})")),
                       doctest::Contains("generator.layers"), ConfigError);
}

TEST_CASE("wrong types and invalid values are rejected") {
  CHECK_THROWS_AS(run_config_from_json(json::parse(R"({"max_iterations": "ten"})")), ConfigError);
  CHECK_THROWS_AS(run_config_from_json(json::parse(R"({"max_iterations": 2.5})")), ConfigError);
  CHECK_THROWS_AS(run_config_from_json(json::parse(R"({"seed": -1})")), ConfigError);
  CHECK_THROWS_AS(run_config_from_json(json::parse(R"({"energy": {"alpha": 2}})")), ConfigError);
  CHECK_THROWS_AS(run_config_from_json(json::parse(R"({"energy": {"variant": "tv"}})")), ConfigError);
  CHECK_THROWS_AS(run_config_from_json(json::parse(R"([1, 2])")), ConfigError);
}

TEST_CASE("loading from disk") {
  const auto path = std::filesystem::temp_directory_path() / "dsp_run_config.json";
  std::ofstream(path) << R"({"max_iterations": 7})";
  CHECK(load_run_config(path).max_iterations == 7);
  std::ofstream(path) << "{ not json";
  CHECK_THROWS_AS(load_run_config(path), ConfigError);
  CHECK_THROWS_AS(load_run_config(path.string() + ".missing"), ConfigError);
}
