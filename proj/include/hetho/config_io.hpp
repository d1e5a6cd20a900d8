#pragma once

#include <string>

#include <json.hpp>

#include "hetho/core.hpp"

namespace hetho {

struct SimConfig;

/// Everything a run needs besides simulator knobs.
struct RunConfig {
  NetworkConfig network;
  SpeedModel speed = SpeedModel::uniform(5.0);
  UserDensityModel users;

  bool operator==(const RunConfig&) const = default;
};

/// Parses the config schema. Densities and areas may be given per km^2 / km^2
/// (`density_per_km2`, `user_density_per_km2`, `region_area_km2`) or in SI
/// (`density_per_m2`, `user_density_per_m2`, `region_area_m2`); everything is
/// converted to SI and validated. Throws ConfigError.
RunConfig parse_run_config(const nlohmann::json& j);
RunConfig load_run_config(const std::string& path);
RunConfig parse_run_config_text(const std::string& text);

/// Normalised form using the SI keys, so parsing it back is exact.
nlohmann::json to_json(const RunConfig& cfg);
nlohmann::json to_json(const SpeedModel& speed);
nlohmann::json to_json(const SimConfig& sim);

/// Sets one parameter by path and re-validates. Paths index the `tiers`
/// array from 0 like the JSON: tiers[i].density (per km^2), tiers[i].power,
/// tiers[i].alpha, tiers[i].bias, speed.mean (m/s), user_density (per km^2).
RunConfig apply_parameter(RunConfig cfg, const std::string& path, double value);

}  // namespace hetho
