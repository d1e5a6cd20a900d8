#include "hetho/analytic.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace hetho {

namespace {

constexpr double kPi = std::numbers::pi;

// Kernel tolerance sits well below the outer tolerance so the outer
// integrand is smooth to the outer rule.
constexpr double kKernelTolerance = 1e-14;

double exponent_ratio(const NetworkConfig& cfg, TierIndex m, TierIndex n) {
  return cfg.tier(m).pathloss_exponent / cfg.tier(n).pathloss_exponent;
}

// pi * sum_i lambda_i (R_i^lb)^2, the void-probability exponent for a
// serving station of tier m at distance r.
double void_exponent(const NetworkConfig& cfg, TierIndex m, double r) {
  double sum = 0.0;
  for (TierIndex i = 0; i < cfg.tier_count(); ++i) {
    const double lb = distance_lower_bound(cfg, m, i, r);
    sum += cfg.tier(i).density * lb * lb;
  }
  return kPi * sum;
}

void require_tier(const NetworkConfig& cfg, TierIndex m) {
  if (m >= cfg.tier_count()) throw std::out_of_range("tier index out of range");
}

QuadResult require_converged(QuadResult r, const char* what) {
  if (!r.converged) throw QuadratureError(std::string(what) + " did not converge", r);
  return r;
}

}  // namespace

double compensated_total(const Eigen::MatrixXd& m) {
  double sum = 0.0, carry = 0.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const double x = m(i, j);
      const double t = sum + x;
      if (std::abs(sum) >= std::abs(x))
        carry += (sum - t) + x;
      else
        carry += (x - t) + sum;
      sum = t;
    }
  }
  return sum + carry;
}

RateMatrix RateMatrix::from_pairwise(Eigen::MatrixXd pairwise, Provenance provenance) {
  RateMatrix out;
  out.total = compensated_total(pairwise);
  out.pairwise = std::move(pairwise);
  out.provenance = provenance;
  return out;
}

double distance_lower_bound(const NetworkConfig& cfg, TierIndex m, TierIndex n,
                            double serving_distance) {
  if (serving_distance < 0.0) throw std::domain_error("serving distance must be >= 0");
  if (m == n) return serving_distance;
  const auto& tm = cfg.tier(m);
  const auto& tn = cfg.tier(n);
  const double scale = std::pow(tn.biased_power() / tm.biased_power(), 1.0 / tn.pathloss_exponent);
  return scale * std::pow(serving_distance, tm.pathloss_exponent / tn.pathloss_exponent);
}

double association_distance_pdf(const NetworkConfig& cfg, TierIndex m, double serving_distance) {
  require_tier(cfg, m);
  if (serving_distance < 0.0) throw std::domain_error("serving distance must be >= 0");
  return 2.0 * kPi * cfg.tier(m).density * serving_distance *
         std::exp(-void_exponent(cfg, m, serving_distance));
}

double outer_truncation_radius(const NetworkConfig& cfg, TierIndex m, double exponent) {
  require_tier(cfg, m);
  // The exponent is increasing in r; bracket then bisect.
  double lo = 0.0;
  double hi = 1.0 / std::sqrt(cfg.total_density());
  while (void_exponent(cfg, m, hi) < exponent) {
    lo = hi;
    hi *= 2.0;
  }
  for (int it = 0; it < 200 && hi - lo > 1e-13 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (void_exponent(cfg, m, mid) < exponent ? lo : hi) = mid;
  }
  return hi;
}

QuadResult tier_association_probability(const NetworkConfig& cfg, TierIndex m,
                                        const QuadratureSpec& spec) {
  require_tier(cfg, m);
  if (cfg.tier_count() == 1) return {1.0, 0.0, 0, true};
  // Dimensionless variable s = R sqrt(Lambda).
  const double root = std::sqrt(cfg.total_density());
  const double s_max = outer_truncation_radius(cfg, m, spec.outer_truncation_exponent) * root;
  const double lambda_m = cfg.tier(m).density;
  auto integrand = [&](double s) {
    const double r = s / root;
    return s * std::exp(-void_exponent(cfg, m, r));
  };
  auto res = integrate_adaptive(integrand, 0.0, s_max, spec.relative_tolerance,
                                spec.absolute_tolerance, spec.max_subdivisions);
  require_converged(res, "association probability");
  const double scale = 2.0 * kPi * lambda_m / cfg.total_density();
  res.value *= scale;
  res.error *= scale;
  return res;
}

QuadResult handover_kernel_estimate(double rho) {
  if (!(rho > 0.0) || !std::isfinite(rho)) throw std::domain_error("kernel needs rho > 0");
  if (rho == 1.0) return {2.0, 0.0, 0, true};
  std::function<double(double)> integrand;
  if (rho < 1.0) {
    const double rho2 = rho * rho;
    integrand = [rho2](double t) {
      const double s = std::sin(t), c = std::cos(t);
      const double root = std::sqrt(1.0 - rho2 * s * s);
      return root + rho2 * c * c / root;
    };
  } else {
    const double rho2 = rho * rho;
    integrand = [rho2](double t) {
      const double s = std::sin(t), c = std::cos(t);
      const double root = std::sqrt(rho2 - s * s);
      return c * c / root + root;
    };
  }
  return integrate_adaptive(integrand, 0.0, 0.5 * kPi, kKernelTolerance, 0.0, 500);
}

QuadResult handover_kernel_tanh_sinh(double rho) {
  if (!(rho > 0.0) || !std::isfinite(rho)) throw std::domain_error("kernel needs rho > 0");
  if (rho == 1.0) return {2.0, 0.0, 0, true};
  const double upper = std::min(1.0, rho);
  const double rho2 = rho * rho;
  auto integrand = [&](double z, double, double to_upper) {
    // Factor the vanishing difference at the upper limit to keep precision.
    const double one_minus = rho < 1.0 ? 1.0 - z * z : to_upper * (1.0 + z);
    const double rho_minus = rho < 1.0 ? to_upper * (rho + z) : rho2 - z * z;
    return std::sqrt(one_minus / rho_minus) + std::sqrt(rho_minus / one_minus);
  };
  return integrate_tanh_sinh(integrand, 0.0, upper, 1e-13);
}

double handover_kernel(double rho) {
  auto res = handover_kernel_estimate(rho);
  if (res.converged) return res.value;
  auto fallback = handover_kernel_tanh_sinh(rho);
  require_converged(fallback, "handover kernel");
  return fallback.value;
}

QuadResult pairwise_rate_per_speed(const NetworkConfig& cfg, TierIndex m, TierIndex n,
                                   const QuadratureSpec& spec) {
  require_tier(cfg, m);
  require_tier(cfg, n);
  const double total = cfg.total_density();
  const double root = std::sqrt(total);
  // R_n^lb moves as kappa * R_n^lb / R per unit change of R along the
  // displacement; kappa = 1 when the exponents agree.
  const double kappa = exponent_ratio(cfg, m, n);
  const double lambda_prod = cfg.tier(m).density * cfg.tier(n).density;

  auto integrand = [&](double s) {
    const double r = s / root;
    if (r == 0.0) return 0.0;
    const double lb = distance_lower_bound(cfg, m, n, r);
    const double weight = std::exp(-void_exponent(cfg, m, r));
    if (weight == 0.0 || lb == 0.0) return 0.0;
    const double k = handover_kernel(r / (kappa * lb));
    return 8.0 * lambda_prod * kappa * lb * lb * k * weight / total;
  };

  std::vector<double> breaks;
  if (kappa != 1.0) {
    // rho(R) = R / (kappa R_n^lb) crosses 1 once; the kernel has a kink there.
    const double scale = distance_lower_bound(cfg, m, n, 1.0);
    const double r_cross = std::pow(kappa * scale, 1.0 / (1.0 - kappa));
    if (std::isfinite(r_cross)) breaks.push_back(r_cross * root);
  }
  const double s_max = outer_truncation_radius(cfg, m, spec.outer_truncation_exponent) * root;
  auto res = integrate_adaptive(integrand, 0.0, s_max, spec.relative_tolerance,
                                spec.absolute_tolerance, spec.max_subdivisions, breaks);
  require_converged(res, "pairwise handover integral");
  res.value *= root;
  res.error *= root;
  return res;
}

double pairwise_handover_rate(const NetworkConfig& cfg, TierIndex m, TierIndex n,
                              const SpeedModel& speed, const UserDensityModel& users,
                              const QuadratureSpec& spec) {
  const double count = users.density_for_tier(m) * cfg.region_area;
  const double mean_speed = speed.for_tier(m).mean();
  if (count == 0.0 || mean_speed == 0.0) return 0.0;
  return count * mean_speed * pairwise_rate_per_speed(cfg, m, n, spec).value;
}

RateMatrix total_handover_rate(const NetworkConfig& cfg, const SpeedModel& speed,
                               const UserDensityModel& users, const QuadratureSpec& spec) {
  const auto n_tiers = static_cast<Eigen::Index>(cfg.tier_count());
  Eigen::MatrixXd pairwise(n_tiers, n_tiers);
  for (Eigen::Index m = 0; m < n_tiers; ++m)
    for (Eigen::Index n = 0; n < n_tiers; ++n)
      pairwise(m, n) = pairwise_handover_rate(cfg, static_cast<TierIndex>(m),
                                              static_cast<TierIndex>(n), speed, users, spec);
  return RateMatrix::from_pairwise(std::move(pairwise), Provenance::analytic);
}

double single_tier_rate(double density, double user_density, double region_area,
                        double mean_speed) {
  if (!(density > 0.0)) throw std::domain_error("density must be positive");
  return 4.0 * std::sqrt(density) / kPi * user_density * region_area * mean_speed;
}

double equal_alpha_pairwise_rate(const NetworkConfig& cfg, TierIndex m, TierIndex n,
                                 const SpeedModel& speed, const UserDensityModel& users) {
  require_tier(cfg, m);
  require_tier(cfg, n);
  double weighted = 0.0;
  for (TierIndex i = 0; i < cfg.tier_count(); ++i) {
    const double b = beta_factor(cfg, m, i);
    weighted += cfg.tier(i).density * b * b;
  }
  const double beta = beta_factor(cfg, m, n);
  const double count = users.density_for_tier(m) * cfg.region_area;
  const double mean_speed = speed.for_tier(m).mean();
  return 2.0 * cfg.tier(n).density * cfg.tier(m).density * beta * beta * count /
         (kPi * std::pow(weighted, 1.5)) * mean_speed * handover_kernel(1.0 / beta);
}

double ResidenceTime::pdf(double t) const {
  if (t < 0.0 || !std::isfinite(mean)) return 0.0;
  return std::exp(-t / mean) / mean;
}

double ResidenceTime::cdf(double t) const {
  if (t <= 0.0 || !std::isfinite(mean)) return 0.0;
  return -std::expm1(-t / mean);
}

ResidenceTime residence_time_distribution(const NetworkConfig& cfg, TierIndex m, double speed,
                                          const QuadratureSpec& spec) {
  if (!(speed > 0.0)) throw std::domain_error("residence time needs a positive constant speed");
  double per_speed = 0.0;
  for (TierIndex n = 0; n < cfg.tier_count(); ++n)
    per_speed += pairwise_rate_per_speed(cfg, m, n, spec).value;
  const double gamma = tier_association_probability(cfg, m, spec).value;
  const double rate = speed * per_speed;
  ResidenceTime out;
  out.mean = rate > 0.0 ? gamma / rate : std::numeric_limits<double>::infinity();
  return out;
}

}  // namespace hetho
