#include "hetho/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace hetho {

namespace {

bool positive_finite(double x) { return std::isfinite(x) && x > 0.0; }

std::string tier_label(std::size_t n) { return "tier " + std::to_string(n + 1) + ": "; }

}  // namespace

double NetworkConfig::total_density() const {
  double sum = 0.0;
  for (const auto& t : tiers) sum += t.density;
  return sum;
}

bool NetworkConfig::equal_exponents() const {
  return std::all_of(tiers.begin(), tiers.end(), [&](const TierParams& t) {
    return t.pathloss_exponent == tiers.front().pathloss_exponent;
  });
}

SpeedModel SpeedModel::constant(double speed) {
  SpeedModel s;
  s.kind_ = Kind::constant;
  s.value_ = speed;
  return s;
}

SpeedModel SpeedModel::uniform(double mean) {
  SpeedModel s;
  s.kind_ = Kind::uniform;
  s.value_ = mean;
  return s;
}

SpeedModel SpeedModel::table(std::vector<std::pair<double, double>> entries) {
  SpeedModel s;
  s.kind_ = Kind::table;
  double total = 0.0;
  for (const auto& [v, w] : entries) total += w;
  if (!(total > 0.0)) throw ConfigError("speed table weights must sum to a positive value");
  for (auto& e : entries) e.second /= total;
  s.table_ = std::move(entries);
  return s;
}

double SpeedModel::mean() const {
  switch (kind_) {
    case Kind::constant:
    case Kind::uniform:
      return value_;
    case Kind::table: {
      double m = 0.0;
      for (const auto& [v, w] : table_) m += v * w;
      return m;
    }
  }
  return 0.0;
}

double SpeedModel::sample(double u) const {
  switch (kind_) {
    case Kind::constant:
      return value_;
    case Kind::uniform:
      return 2.0 * value_ * u;
    case Kind::table: {
      double acc = 0.0;
      for (const auto& [v, w] : table_) {
        acc += w;
        if (u < acc) return v;
      }
      return table_.back().first;
    }
  }
  return 0.0;
}

SpeedModel SpeedModel::scaled(double factor) const {
  SpeedModel s = *this;
  s.value_ *= factor;
  for (auto& e : s.table_) e.first *= factor;
  for (auto& t : s.per_tier) t = t.scaled(factor);
  return s;
}

const SpeedModel& SpeedModel::for_tier(TierIndex m) const {
  if (per_tier.empty()) return *this;
  return per_tier.at(m);
}

UserDensityModel UserDensityModel::uniform(double density) {
  UserDensityModel u;
  u.uniform_ = density;
  return u;
}

UserDensityModel UserDensityModel::per_tier(std::vector<double> densities) {
  UserDensityModel u;
  u.per_tier_ = std::move(densities);
  return u;
}

UserDensityModel UserDensityModel::from_config(const NetworkConfig& cfg) {
  return uniform(cfg.user_density);
}

double UserDensityModel::density_for_tier(TierIndex m) const {
  if (per_tier_.empty()) return uniform_;
  return per_tier_.at(m);
}

NetworkConfig validate_config(NetworkConfig raw) {
  if (raw.tiers.empty()) throw ConfigError("at least one tier is required");
  for (std::size_t n = 0; n < raw.tiers.size(); ++n) {
    const auto& t = raw.tiers[n];
    if (!positive_finite(t.density)) throw ConfigError(tier_label(n) + "density must be positive");
    if (!positive_finite(t.power)) throw ConfigError(tier_label(n) + "power must be positive");
    if (!positive_finite(t.bias)) throw ConfigError(tier_label(n) + "bias must be positive");
    if (!std::isfinite(t.pathloss_exponent) || !(t.pathloss_exponent > 2.0))
      throw ConfigError(tier_label(n) + "pathloss exponent must exceed 2");
  }
  if (!std::isfinite(raw.user_density) || raw.user_density < 0.0)
    throw ConfigError("user density must be non-negative");
  if (!positive_finite(raw.region_area)) throw ConfigError("region area must be positive");
  const auto& p = raw.propagation;
  if (!positive_finite(p.reference_loss)) throw ConfigError("reference loss must be positive");
  if (!positive_finite(p.reference_distance))
    throw ConfigError("reference distance must be positive");
  if (!std::isfinite(p.wavelength) || p.wavelength < 0.0)
    throw ConfigError("wavelength must be non-negative");
  return raw;
}

void validate_speed_model(const SpeedModel& speed) {
  switch (speed.kind()) {
    case SpeedModel::Kind::constant:
    case SpeedModel::Kind::uniform:
      if (!std::isfinite(speed.parameter()) || speed.parameter() < 0.0)
        throw ConfigError("speed must be non-negative and finite");
      break;
    case SpeedModel::Kind::table:
      if (speed.entries().empty()) throw ConfigError("speed table is empty");
      for (const auto& [v, w] : speed.entries()) {
        if (!std::isfinite(v) || v < 0.0) throw ConfigError("speed table values must be >= 0");
        if (!std::isfinite(w) || w < 0.0) throw ConfigError("speed table weights must be >= 0");
      }
      break;
  }
  for (const auto& t : speed.per_tier) validate_speed_model(t);
}

void validate_user_density(const UserDensityModel& users, std::size_t tiers) {
  if (users.is_uniform()) {
    const double f = users.density_for_tier(0);
    if (!std::isfinite(f) || f < 0.0) throw ConfigError("user density must be non-negative");
    return;
  }
  if (users.tier_densities().size() != tiers)
    throw ConfigError("per-tier user density needs one value per tier");
  for (double f : users.tier_densities())
    if (!std::isfinite(f) || f < 0.0) throw ConfigError("user density must be non-negative");
}

double beta_factor(const NetworkConfig& cfg, TierIndex m, TierIndex n) {
  if (!cfg.equal_exponents())
    throw ConfigError("beta factor requires all tiers to share one pathloss exponent");
  if (m == n) return 1.0;
  const double alpha = cfg.tier(m).pathloss_exponent;
  return std::pow(cfg.tier(n).biased_power() / cfg.tier(m).biased_power(), 1.0 / alpha);
}

}  // namespace hetho
