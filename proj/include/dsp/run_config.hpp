#pragma once

#include <filesystem>
#include <string_view>

#include <json.hpp>

#include "dsp/engine.hpp"

namespace dsp {

std::string_view to_string(EnergyVariant variant);

/// Every field, nested as generator / energy / scores plus the run scalars.
nlohmann::json to_json(const RunConfig& config);

/// Overlays `json` on `base`. Missing keys keep their base value; unknown
/// keys and wrongly typed values throw ConfigError naming the key path.
/// The result is validated.
RunConfig run_config_from_json(const nlohmann::json& json, const RunConfig& base = {});

RunConfig load_run_config(const std::filesystem::path& path, const RunConfig& base = {});

/// Config preset for 128x128 work: depth 4, 32 down/up and 16 skip
/// channels, 500 iterations.
RunConfig desk_scale_config();

}  // namespace dsp
