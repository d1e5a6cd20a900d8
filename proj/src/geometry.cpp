#include "hetho/geometry.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace hetho {

namespace {

constexpr double kPi = std::numbers::pi;

double kappa(const NetworkConfig& cfg, TierIndex m, TierIndex n) {
  return cfg.tier(m).pathloss_exponent / cfg.tier(n).pathloss_exponent;
}

double lower_bound(const ServingGeometry& g, const NetworkConfig& cfg) {
  return distance_lower_bound(cfg, g.serving_tier, g.candidate_tier, g.serving_distance);
}

// kappa R_n^lb cos(theta) / R: the crescent case is |t| <= 1.
double branch_argument(const ServingGeometry& g, const NetworkConfig& cfg) {
  if (!(g.serving_distance > 0.0)) throw std::domain_error("serving distance must be positive");
  const double lb = lower_bound(g, cfg);
  return kappa(cfg, g.serving_tier, g.candidate_tier) * lb * std::cos(g.serving_angle) /
         g.serving_distance;
}

}  // namespace

double moved_lower_bound(const ServingGeometry& g, const NetworkConfig& cfg) {
  const double r = g.displacement;
  const double big_r = g.serving_distance;
  const double d2 =
      std::max(0.0, big_r * big_r - 2.0 * r * big_r * std::cos(g.serving_angle) + r * r);
  return distance_lower_bound(cfg, g.serving_tier, g.candidate_tier, std::sqrt(d2));
}

double x_offset(const ServingGeometry& g, const NetworkConfig& cfg) {
  const double lr = moved_lower_bound(g, cfg);
  return g.displacement * g.displacement - lr * lr;
}

double x_offset_slope_at_origin(const ServingGeometry& g, const NetworkConfig& cfg) {
  const double lb = lower_bound(g, cfg);
  return 2.0 * kappa(cfg, g.serving_tier, g.candidate_tier) * lb * lb *
         std::cos(g.serving_angle) / g.serving_distance;
}

double phi_up(const ServingGeometry& g, const NetworkConfig& cfg) {
  return g.displacement + moved_lower_bound(g, cfg);
}

double phi_down(const ServingGeometry& g, const NetworkConfig& cfg) {
  return -g.displacement + moved_lower_bound(g, cfg);
}

bool bad_region_indicator(double candidate_distance, double candidate_angle,
                          const ServingGeometry& g, const NetworkConfig& cfg) {
  if (!(g.displacement > 0.0) || !(candidate_distance > 0.0))
    throw std::domain_error("indicator needs r > 0 and a positive candidate distance");
  if (!(candidate_distance > lower_bound(g, cfg))) return false;
  const double x = x_offset(g, cfg);
  return std::cos(candidate_angle) >
         (candidate_distance * candidate_distance + x) / (2.0 * g.displacement * candidate_distance);
}

BadRegionCase classify_bad_region(const ServingGeometry& g, const NetworkConfig& cfg) {
  const double t = branch_argument(g, cfg);
  if (t > 1.0) return BadRegionCase::empty;
  if (t < -1.0) return BadRegionCase::enclosing;
  return BadRegionCase::crescent;
}

QuadResult bad_region_area_numeric(const ServingGeometry& g, const NetworkConfig& cfg,
                                   const AreaOptions& options) {
  const double r = g.displacement;
  if (!(r > 0.0)) return {};
  const double lb = lower_bound(g, cfg);
  const double up = phi_up(g, cfg);
  const double down = phi_down(g, cfg);
  if (up <= lb) return {};

  // Full circles for R_nj in [R_n^lb, phi^d), arccos width beyond.
  double band = 0.0;
  double from = lb;
  if (down > lb) {
    band = kPi * (down - lb) * (down + lb);
    from = down;
  }
  const double offset = from - down;  // >= 0

  // 2 arccos(q) R with q = (R^2 + x) / (2 r R), using
  //   1 - q = (phi^u - R)(R + phi^d) / (2 r R),  1 + q = (R - phi^d)(R + phi^u) / (2 r R).
  auto width = [&](double rr, double from_start, double to_end) {
    const double one_minus = std::max(0.0, to_end * (rr + down) / (2.0 * r * rr));
    const double one_plus = std::max(0.0, (from_start + offset) * (rr + up) / (2.0 * r * rr));
    return 4.0 * rr * std::atan2(std::sqrt(one_minus), std::sqrt(one_plus));
  };
  auto res = integrate_tanh_sinh(width, from, up, options.relative_tolerance, options.max_levels);
  if (!res.converged)
    throw QuadratureError("bad-region area: resolution too coarse", res);
  res.value += band;
  return res;
}

MonteCarloArea bad_region_area_monte_carlo(const ServingGeometry& g, const NetworkConfig& cfg,
                                           long samples, Philox4x32& rng) {
  MonteCarloArea out;
  out.samples = samples;
  const double lb = lower_bound(g, cfg);
  const double up = phi_up(g, cfg);
  if (up <= lb || samples <= 0) return out;
  const double annulus = kPi * (up * up - lb * lb);
  for (long i = 0; i < samples; ++i) {
    const double rr = std::sqrt(lb * lb + rng.uniform() * (up * up - lb * lb));
    const double angle = 2.0 * kPi * rng.uniform();
    if (rr > lb && bad_region_indicator(rr, angle, g, cfg)) ++out.hits;
  }
  const double p = static_cast<double>(out.hits) / static_cast<double>(samples);
  out.value = annulus * p;
  out.std_error = annulus * std::sqrt(p * (1.0 - p) / static_cast<double>(samples));
  return out;
}

DerivativeTerms derivative_terms(const ServingGeometry& g, const NetworkConfig& cfg) {
  const double t = branch_argument(g, cfg);
  const double lb = lower_bound(g, cfg);
  DerivativeTerms out;
  if (t < -1.0) {
    out.h1 = -2.0 * kPi * lb * t;
  } else if (t <= 1.0) {
    out.h2 = -2.0 * lb * t * std::acos(t);
    out.h3 = 2.0 * lb * std::sqrt(std::max(0.0, 1.0 - t * t));
  }
  return out;
}

double bad_region_area_derivative(const ServingGeometry& g, const NetworkConfig& cfg) {
  return derivative_terms(g, cfg).sum();
}

DerivativeTerms angular_integrals(double serving_distance, TierIndex m, TierIndex n,
                                const NetworkConfig& cfg) {
  ServingGeometry g{serving_distance, 0.0, 0.0, m, n};
  const double lb = distance_lower_bound(cfg, m, n, serving_distance);
  const double threshold = serving_distance / (kappa(cfg, m, n) * lb);
  std::vector<double> breaks;
  if (threshold <= 1.0) {
    breaks.push_back(std::acos(threshold));
    breaks.push_back(std::acos(-threshold));
  }
  auto term = [&](auto pick) {
    auto f = [&](double theta) {
      g.serving_angle = theta;
      return pick(derivative_terms(g, cfg));
    };
    // Even in theta: integrate over [0, pi] and double.
    auto res = integrate_adaptive(f, 0.0, kPi, 1e-13, 1e-300, 4000, breaks);
    return 2.0 * res.value;
  };
  DerivativeTerms out;
  out.h1 = term([](const DerivativeTerms& a) { return a.h1; });
  out.h2 = term([](const DerivativeTerms& a) { return a.h2; });
  out.h3 = term([](const DerivativeTerms& a) { return a.h3; });
  return out;
}

double keep_link_probability(const ServingGeometry& g, const NetworkConfig& cfg,
                             const AreaOptions& options) {
  if (g.displacement == 0.0) return 1.0;
  double exponent = 0.0;
  for (TierIndex n = 0; n < cfg.tier_count(); ++n) {
    ServingGeometry gn = g;
    gn.candidate_tier = n;
    exponent += cfg.tier(n).density * bad_region_area_numeric(gn, cfg, options).value;
  }
  return std::exp(-exponent);
}

double keep_link_loss_slope(const ServingGeometry& g, const NetworkConfig& cfg) {
  double slope = 0.0;
  for (TierIndex n = 0; n < cfg.tier_count(); ++n) {
    ServingGeometry gn = g;
    gn.candidate_tier = n;
    slope += cfg.tier(n).density * bad_region_area_derivative(gn, cfg);
  }
  return slope;
}

QuadResult angular_average_rate_per_speed(const NetworkConfig& cfg, TierIndex m, TierIndex n,
                                          const QuadratureSpec& spec) {
  const double root = std::sqrt(cfg.total_density());
  const double k = kappa(cfg, m, n);
  auto integrand = [&](double s) {
    const double r = s / root;
    if (r == 0.0) return 0.0;
    const double pdf = association_distance_pdf(cfg, m, r);
    if (pdf == 0.0) return 0.0;
    const double mean_slope = angular_integrals(r, m, n, cfg).sum() / (2.0 * kPi);
    return cfg.tier(n).density * mean_slope * pdf;
  };
  std::vector<double> breaks;
  if (k != 1.0) {
    const double scale = distance_lower_bound(cfg, m, n, 1.0);
    const double r_cross = std::pow(k * scale, 1.0 / (1.0 - k));
    if (std::isfinite(r_cross)) breaks.push_back(r_cross * root);
  }
  const double s_max = outer_truncation_radius(cfg, m, spec.outer_truncation_exponent) * root;
  auto res = integrate_adaptive(integrand, 0.0, s_max, spec.relative_tolerance,
                                spec.absolute_tolerance * root, spec.max_subdivisions, breaks);
  if (!res.converged) throw QuadratureError("angular-average rate did not converge", res);
  res.value /= root;
  res.error /= root;
  return res;
}

std::vector<BoundaryPoint> bad_region_boundary(const ServingGeometry& g, const NetworkConfig& cfg,
                                               int points_per_arc) {
  std::vector<BoundaryPoint> out;
  const double r = g.displacement;
  const double lb = lower_bound(g, cfg);
  const double moved = moved_lower_bound(g, cfg);
  for (int i = 0; i <= points_per_arc; ++i) {
    const double a = 2.0 * kPi * i / points_per_arc;
    const double x = r + moved * std::cos(a), y = moved * std::sin(a);
    if (std::hypot(x, y) >= lb) out.push_back({"moved_arc", x, y});
  }
  for (int i = 0; i <= points_per_arc; ++i) {
    const double a = 2.0 * kPi * i / points_per_arc;
    const double x = lb * std::cos(a), y = lb * std::sin(a);
    if (std::hypot(x - r, y) <= moved) out.push_back({"lower_bound_arc", x, y});
  }
  return out;
}

}  // namespace hetho
