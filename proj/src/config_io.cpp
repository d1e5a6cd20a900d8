#include "hetho/config_io.hpp"

#include <fstream>
#include <regex>
#include <sstream>

#include "hetho/sim.hpp"

namespace hetho {

namespace {

using nlohmann::json;

constexpr double kPerKm2 = 1e-6;  // (1/km^2) in 1/m^2
constexpr double kKm2 = 1e6;      // km^2 in m^2

double number(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) throw ConfigError(std::string("missing key '") + key + "'");
  if (!it->is_number()) throw ConfigError(std::string("key '") + key + "' must be a number");
  return it->get<double>();
}

// Reads one of two spellings, converting the first by `scale`.
double either(const json& j, const char* scaled_key, double scale, const char* si_key,
              std::optional<double> fallback = std::nullopt) {
  const bool has_scaled = j.contains(scaled_key);
  const bool has_si = j.contains(si_key);
  if (has_scaled && has_si)
    throw ConfigError(std::string("give only one of '") + scaled_key + "' and '" + si_key + "'");
  if (has_si) return number(j, si_key);
  if (has_scaled) return number(j, scaled_key) * scale;
  if (fallback) return *fallback;
  throw ConfigError(std::string("missing key '") + scaled_key + "'");
}

SpeedModel parse_speed(const json& j) {
  if (!j.is_object()) throw ConfigError("'speed' must be an object");
  const std::string kind = j.value("kind", "uniform");
  SpeedModel out;
  if (kind == "constant") {
    out = SpeedModel::constant(number(j, "mean_mps"));
  } else if (kind == "uniform") {
    out = SpeedModel::uniform(number(j, "mean_mps"));
  } else if (kind == "table") {
    if (!j.contains("table") || !j["table"].is_array())
      throw ConfigError("speed table needs 'table': [[speed_mps, weight], ...]");
    std::vector<std::pair<double, double>> entries;
    for (const auto& row : j["table"]) {
      if (!row.is_array() || row.size() != 2 || !row[0].is_number() || !row[1].is_number())
        throw ConfigError("speed table rows must be [speed_mps, weight]");
      entries.emplace_back(row[0].get<double>(), row[1].get<double>());
    }
    if (entries.empty()) throw ConfigError("speed table is empty");
    out = SpeedModel::table(std::move(entries));
  } else {
    throw ConfigError("unknown speed kind '" + kind + "'");
  }
  if (j.contains("per_tier")) {
    if (!j["per_tier"].is_array()) throw ConfigError("'per_tier' must be an array");
    for (const auto& t : j["per_tier"]) out.per_tier.push_back(parse_speed(t));
  }
  return out;
}

}  // namespace

RunConfig parse_run_config(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  RunConfig out;
  auto& net = out.network;
  if (!j.contains("tiers") || !j["tiers"].is_array()) throw ConfigError("missing 'tiers' array");
  for (const auto& t : j["tiers"]) {
    if (!t.is_object()) throw ConfigError("each tier must be an object");
    TierParams p;
    p.density = either(t, "density_per_km2", kPerKm2, "density_per_m2");
    p.power = number(t, "power");
    p.pathloss_exponent = number(t, "alpha");
    p.bias = t.contains("bias") ? number(t, "bias") : 1.0;
    net.tiers.push_back(p);
  }
  net.user_density = either(j, "user_density_per_km2", kPerKm2, "user_density_per_m2");
  net.region_area = either(j, "region_area_km2", kKm2, "region_area_m2", 1e6);
  if (j.contains("propagation")) {
    const auto& p = j["propagation"];
    if (!p.is_object()) throw ConfigError("'propagation' must be an object");
    if (p.contains("L0")) net.propagation.reference_loss = number(p, "L0");
    if (p.contains("r0")) net.propagation.reference_distance = number(p, "r0");
    if (p.contains("wavelength_m")) net.propagation.wavelength = number(p, "wavelength_m");
  }
  net = validate_config(std::move(net));

  if (j.contains("speed")) out.speed = parse_speed(j["speed"]);
  validate_speed_model(out.speed);
  if (!out.speed.per_tier.empty() && out.speed.per_tier.size() != net.tier_count())
    throw ConfigError("per-tier speed needs one entry per tier");

  const bool per_km2 = j.contains("user_density_per_tier_per_km2");
  const bool per_m2 = j.contains("user_density_per_tier_per_m2");
  if (per_km2 && per_m2) throw ConfigError("give only one per-tier user density key");
  if (per_km2 || per_m2) {
    const auto& arr = j[per_km2 ? "user_density_per_tier_per_km2" : "user_density_per_tier_per_m2"];
    if (!arr.is_array()) throw ConfigError("per-tier user density must be an array");
    std::vector<double> values;
    for (const auto& v : arr) {
      if (!v.is_number()) throw ConfigError("per-tier user density must be numbers");
      values.push_back(v.get<double>() * (per_km2 ? kPerKm2 : 1.0));
    }
    out.users = UserDensityModel::per_tier(std::move(values));
  } else {
    out.users = UserDensityModel::from_config(net);
  }
  validate_user_density(out.users, net.tier_count());
  return out;
}

RunConfig parse_run_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
  try {
    return parse_run_config(j);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid config: ") + e.what());
  }
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_run_config_text(buffer.str());
}

json to_json(const SpeedModel& speed) {
  json j;
  switch (speed.kind()) {
    case SpeedModel::Kind::constant:
      j["kind"] = "constant";
      j["mean_mps"] = speed.parameter();
      break;
    case SpeedModel::Kind::uniform:
      j["kind"] = "uniform";
      j["mean_mps"] = speed.parameter();
      break;
    case SpeedModel::Kind::table: {
      j["kind"] = "table";
      json rows = json::array();
      for (const auto& [v, w] : speed.entries()) rows.push_back({v, w});
      j["table"] = rows;
      break;
    }
  }
  if (!speed.per_tier.empty()) {
    j["per_tier"] = json::array();
    for (const auto& t : speed.per_tier) j["per_tier"].push_back(to_json(t));
  }
  return j;
}

json to_json(const RunConfig& cfg) {
  json j;
  j["tiers"] = json::array();
  for (const auto& t : cfg.network.tiers)
    j["tiers"].push_back({{"density_per_m2", t.density},
                          {"power", t.power},
                          {"alpha", t.pathloss_exponent},
                          {"bias", t.bias}});
  j["user_density_per_m2"] = cfg.network.user_density;
  j["region_area_m2"] = cfg.network.region_area;
  j["propagation"] = {{"L0", cfg.network.propagation.reference_loss},
                      {"r0", cfg.network.propagation.reference_distance},
                      {"wavelength_m", cfg.network.propagation.wavelength}};
  j["speed"] = to_json(cfg.speed);
  if (!cfg.users.is_uniform()) j["user_density_per_tier_per_m2"] = cfg.users.tier_densities();
  return j;
}

json to_json(const SimConfig& sim) {
  return {{"disk_radius_m", sim.disk_radius},
          {"count_radius_m", sim.count_radius},
          {"duration_s", sim.duration},
          {"time_step_s", sim.time_step},
          {"model", sim.mobility.model == WalkingModel::rwp ? "rwp" : "straight"},
          {"speed", to_json(sim.mobility.speed)},
          {"hold_max_s", sim.mobility.hold_max},
          {"redraw_speed_on_turn", sim.mobility.redraw_speed_on_turn},
          {"replications", sim.replications},
          {"base_seed", sim.base_seed},
          {"motion_fraction", sim.motion_fraction},
          {"residence_horizon_s", sim.residence_horizon}};
}

RunConfig apply_parameter(RunConfig cfg, const std::string& path, double value) {
  static const std::regex tier_path(R"(tiers\[(\d+)\]\.(density|power|alpha|bias))");
  std::smatch match;
  if (std::regex_match(path, match, tier_path)) {
    const auto index = std::stoul(match[1].str());
    if (index >= cfg.network.tier_count())
      throw ConfigError("parameter path '" + path + "': no such tier");
    auto& tier = cfg.network.tiers[index];
    const auto field = match[2].str();
    if (field == "density") tier.density = value * kPerKm2;
    else if (field == "power") tier.power = value;
    else if (field == "alpha") tier.pathloss_exponent = value;
    else tier.bias = value;
  } else if (path == "speed.mean") {
    if (!cfg.speed.per_tier.empty()) throw ConfigError("speed.mean: config has per-tier speeds");
    switch (cfg.speed.kind()) {
      case SpeedModel::Kind::constant: cfg.speed = SpeedModel::constant(value); break;
      case SpeedModel::Kind::uniform: cfg.speed = SpeedModel::uniform(value); break;
      case SpeedModel::Kind::table: {
        const double mean = cfg.speed.mean();
        if (!(mean > 0.0)) throw ConfigError("speed.mean: cannot rescale a zero-mean table");
        cfg.speed = cfg.speed.scaled(value / mean);
        break;
      }
    }
    validate_speed_model(cfg.speed);
  } else if (path == "user_density") {
    cfg.network.user_density = value * kPerKm2;
    if (cfg.users.is_uniform()) cfg.users = UserDensityModel::from_config(cfg.network);
  } else {
    throw ConfigError("unknown parameter path '" + path + "'");
  }
  cfg.network = validate_config(std::move(cfg.network));
  validate_user_density(cfg.users, cfg.network.tier_count());
  return cfg;
}

}  // namespace hetho
