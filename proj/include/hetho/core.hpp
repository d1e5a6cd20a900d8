#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hetho {

// Tier indices are 0-based inside the library. Everything user-facing
// (CLI, CSV, JSON) is 1-based.
using TierIndex = std::size_t;

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// One class of base stations. Densities are per m^2; power is a
/// dimensionless relative value since only ratios P_n B_n / P_m B_m matter.
struct TierParams {
  double density = 0.0;
  double power = 1.0;
  double pathloss_exponent = 4.0;
  double bias = 1.0;

  double biased_power() const { return power * bias; }

  bool operator==(const TierParams&) const = default;
};

/// L_0 and r_0 of the path loss law. Association compares P_n B_n R^{-alpha_n}
/// directly, so neither constant affects any engine output. The wavelength is
/// carried for reference only.
struct PropagationConstants {
  double reference_loss = 1.0;
  double reference_distance = 1.0;
  double wavelength = 0.0;

  bool operator==(const PropagationConstants&) const = default;
};

struct NetworkConfig {
  std::vector<TierParams> tiers;
  PropagationConstants propagation;
  double user_density = 0.0;  // UE per m^2
  double region_area = 1e6;   // m^2

  std::size_t tier_count() const { return tiers.size(); }
  const TierParams& tier(TierIndex n) const { return tiers.at(n); }
  double total_density() const;
  bool equal_exponents() const;

  bool operator==(const NetworkConfig&) const = default;
};

/// Speed distribution of the UEs. Only the mean enters the analytic rates;
/// the simulator samples from the full law.
class SpeedModel {
 public:
  enum class Kind { constant, uniform, table };

  static SpeedModel constant(double speed);
  /// Uniform on [0, 2 * mean].
  static SpeedModel uniform(double mean);
  /// Discrete law: (speed, weight) pairs. Weights are normalised.
  static SpeedModel table(std::vector<std::pair<double, double>> entries);

  Kind kind() const { return kind_; }
  double mean() const;
  /// Inverse-CDF sample from a uniform variate u in [0, 1).
  double sample(double u) const;
  /// Same law with every speed multiplied by factor > 0.
  SpeedModel scaled(double factor) const;

  /// Reference speed: constant value, or the uniform law's mean.
  double parameter() const { return value_; }
  const std::vector<std::pair<double, double>>& entries() const { return table_; }

  /// Per-tier laws f_{m,v}; empty means every tier uses this one.
  std::vector<SpeedModel> per_tier;
  const SpeedModel& for_tier(TierIndex m) const;

  bool operator==(const SpeedModel&) const = default;

 private:
  Kind kind_ = Kind::constant;
  double value_ = 0.0;
  std::vector<std::pair<double, double>> table_;
};

/// UE density, either uniform f_u or per serving-tier f_{m,u}.
class UserDensityModel {
 public:
  static UserDensityModel uniform(double density);
  static UserDensityModel per_tier(std::vector<double> densities);
  /// Uniform model at the config's user_density.
  static UserDensityModel from_config(const NetworkConfig& cfg);

  bool is_uniform() const { return per_tier_.empty(); }
  double density_for_tier(TierIndex m) const;
  const std::vector<double>& tier_densities() const { return per_tier_; }

  bool operator==(const UserDensityModel&) const = default;

 private:
  double uniform_ = 0.0;
  std::vector<double> per_tier_;
};

/// Checks every invariant and returns the config unchanged on success.
NetworkConfig validate_config(NetworkConfig raw);
void validate_speed_model(const SpeedModel& speed);
void validate_user_density(const UserDensityModel& users, std::size_t tiers);

/// beta_n = (P_n B_n / P_m B_m)^{1/alpha}; requires a common exponent.
double beta_factor(const NetworkConfig& cfg, TierIndex m, TierIndex n);

}  // namespace hetho
