#pragma once

#include <functional>
#include <optional>

#include <Eigen/Dense>

#include "hetho/core.hpp"
#include "hetho/quadrature.hpp"

namespace hetho {

struct QuadratureSpec {
  double relative_tolerance = 1e-9;
  double absolute_tolerance = 1e-12;
  /// The outer R integral stops where pi * sum_i lambda_i (R_i^lb)^2 reaches
  /// this value; the discarded tail weight is below exp(-exponent).
  double outer_truncation_exponent = 40.0;
  int max_subdivisions = 2000;
};

enum class Provenance { analytic, simulated };

/// Pairwise handover rates lambda_h^{m-n} (per second) and their sum.
struct RateMatrix {
  Eigen::MatrixXd pairwise;
  double total = 0.0;
  Provenance provenance = Provenance::analytic;

  // Simulation-only fields.
  std::optional<Eigen::MatrixXd> ci_halfwidth;
  std::optional<double> total_ci_halfwidth;
  std::optional<Eigen::MatrixXd> events;
  std::optional<Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>> ci_unreliable;
  std::optional<double> sim_time;

  /// Builds a matrix whose total is the row-major Neumaier-compensated sum of
  /// `pairwise`, so the total is reproducible bit for bit.
  static RateMatrix from_pairwise(Eigen::MatrixXd pairwise, Provenance provenance);
};

/// Row-major compensated sum used for every RateMatrix total.
double compensated_total(const Eigen::MatrixXd& m);

/// R_n^lb = (P_n B_n / P_m B_m)^{1/alpha_n} R_mk^{alpha_m/alpha_n}.
double distance_lower_bound(const NetworkConfig& cfg, TierIndex m, TierIndex n,
                            double serving_distance);

/// Density of the serving distance for tier m (integrates to gamma_m, not 1).
double association_distance_pdf(const NetworkConfig& cfg, TierIndex m, double serving_distance);

/// Serving distance at which pi * sum_i lambda_i (R_i^lb)^2 equals `exponent`.
double outer_truncation_radius(const NetworkConfig& cfg, TierIndex m, double exponent);

/// gamma_m, the probability of associating with tier m.
QuadResult tier_association_probability(const NetworkConfig& cfg, TierIndex m,
                                        const QuadratureSpec& spec = {});

/// Inner z integral
///   K(rho) = int_0^{min(1,rho)} sqrt((1-z^2)/(rho^2-z^2)) + sqrt((rho^2-z^2)/(1-z^2)) dz.
/// Evaluated after z = b sin(t), b = min(1, rho), which removes the endpoint
/// singularity; falls back to tanh-sinh if Gauss-Kronrod does not converge.
double handover_kernel(double rho);
QuadResult handover_kernel_estimate(double rho);
/// Same integral by tanh-sinh on the raw z form. Used as fallback and cross-check.
QuadResult handover_kernel_tanh_sinh(double rho);

/// H_k^{m-n} / v in handovers per metre: the unconditional (not divided by
/// gamma_m) instantaneous rate from tier-m to tier-n stations per unit speed.
QuadResult pairwise_rate_per_speed(const NetworkConfig& cfg, TierIndex m, TierIndex n,
                                   const QuadratureSpec& spec = {});

/// lambda_h^{m-n} = f_{m,u} S E_m[v] H_k^{m-n}/v, in handovers per second.
double pairwise_handover_rate(const NetworkConfig& cfg, TierIndex m, TierIndex n,
                              const SpeedModel& speed, const UserDensityModel& users,
                              const QuadratureSpec& spec = {});

RateMatrix total_handover_rate(const NetworkConfig& cfg, const SpeedModel& speed,
                               const UserDensityModel& users, const QuadratureSpec& spec = {});

/// Homogeneous network: (4 sqrt(lambda) / pi) f_u S E[v].
double single_tier_rate(double density, double user_density, double region_area,
                        double mean_speed);

/// Common-exponent closed form. The R integral is done analytically; only the
/// kernel, at R/R_n^lb = 1/beta_n, is numeric.
double equal_alpha_pairwise_rate(const NetworkConfig& cfg, TierIndex m, TierIndex n,
                                 const SpeedModel& speed, const UserDensityModel& users);

/// Exponential residence-time law in tier-m cells for a constant speed.
struct ResidenceTime {
  double mean = 0.0;  // seconds; +inf when the handover rate is zero
  double rate() const { return 1.0 / mean; }
  double pdf(double t) const;
  double cdf(double t) const;
};

ResidenceTime residence_time_distribution(const NetworkConfig& cfg, TierIndex m, double speed,
                                          const QuadratureSpec& spec = {});

}  // namespace hetho
