#pragma once

#include <string>
#include <vector>

#include "hetho/analytic.hpp"
#include "hetho/core.hpp"
#include "hetho/rng.hpp"

namespace hetho {

/// Serving station at polar (serving_distance, serving_angle) from a UE that
/// moves from the origin to (displacement, 0). `candidate_tier` is the tier
/// whose bad region is examined.
struct ServingGeometry {
  double serving_distance = 0.0;
  double serving_angle = 0.0;
  double displacement = 0.0;
  TierIndex serving_tier = 0;
  TierIndex candidate_tier = 0;
};

/// R_n^lb seen from the moved UE: the same law as distance_lower_bound but
/// with the serving distance measured from (r, 0).
double moved_lower_bound(const ServingGeometry& g, const NetworkConfig& cfg);

/// x_nj = r^2 - (B_n P_n / B_m P_m)^{2/alpha_n} (R^2 - 2 r R cos(theta) + r^2)^{alpha_m/alpha_n}.
double x_offset(const ServingGeometry& g, const NetworkConfig& cfg);

/// d x_nj / d r at r = 0, i.e. 2 kappa (R_n^lb)^2 cos(theta) / R with
/// kappa = alpha_m / alpha_n.
double x_offset_slope_at_origin(const ServingGeometry& g, const NetworkConfig& cfg);

/// phi^u(r) = r + sqrt(r^2 - x_nj) and phi^d(r) = -r + sqrt(r^2 - x_nj).
double phi_up(const ServingGeometry& g, const NetworkConfig& cfg);
double phi_down(const ServingGeometry& g, const NetworkConfig& cfg);

/// True when an n-tier station at polar (distance, angle) would take the
/// moved UE away from its serving station.
bool bad_region_indicator(double candidate_distance, double candidate_angle,
                          const ServingGeometry& g, const NetworkConfig& cfg);

/// The three boundary cases of the bad region.
enum class BadRegionCase {
  empty,     // cos(theta) > R / R_n^lb: no bad region for small r
  crescent,  // |cos(theta)| <= R / R_n^lb: theta range from the arccos bound only
  enclosing  // cos(theta) < -R / R_n^lb: full circles on [R_n^lb, phi^d)
};

/// Case selection from the r -> 0 sign conditions (generalised with kappa).
BadRegionCase classify_bad_region(const ServingGeometry& g, const NetworkConfig& cfg);

struct AreaOptions {
  double relative_tolerance = 1e-11;
  int max_levels = 12;
};

/// Area of the n-tier bad region by polar integration: the radial integral of
/// the angular width times R over [R_n^lb, phi^u], with the full-circle band
/// [R_n^lb, phi^d) in the enclosing case. Throws QuadratureError if the
/// requested resolution is not reached.
QuadResult bad_region_area_numeric(const ServingGeometry& g, const NetworkConfig& cfg,
                                   const AreaOptions& options = {});

struct MonteCarloArea {
  double value = 0.0;
  double std_error = 0.0;
  long hits = 0;
  long samples = 0;
};

/// Hit-count estimate of the same area. Samples the annulus
/// [R_n^lb, phi^u] x [0, 2 pi), which contains the whole region.
MonteCarloArea bad_region_area_monte_carlo(const ServingGeometry& g, const NetworkConfig& cfg,
                                           long samples, Philox4x32& rng);

/// Limit of dA_mn/dr as r -> 0 (displacement in `g` is ignored).
double bad_region_area_derivative(const ServingGeometry& g, const NetworkConfig& cfg);

/// The derivative split into its three named terms; h1 is the enclosing-case
/// term, h2 the arccos term and h3 the radical term of the crescent case.
struct DerivativeTerms {
  double h1 = 0.0;
  double h2 = 0.0;
  double h3 = 0.0;
  double sum() const { return h1 + h2 + h3; }
};
DerivativeTerms derivative_terms(const ServingGeometry& g, const NetworkConfig& cfg);

/// Integrals of h1, h2, h3 over theta in [0, 2 pi) at fixed serving distance.
DerivativeTerms angular_integrals(double serving_distance, TierIndex m, TierIndex n,
                                const NetworkConfig& cfg);

/// prod_n exp(-lambda_n A_mn(r)) over every candidate tier n.
double keep_link_probability(const ServingGeometry& g, const NetworkConfig& cfg,
                             const AreaOptions& options = {});

/// sum_n lambda_n lim dA_mn/dr, the first-order slope of 1 - P_keep.
double keep_link_loss_slope(const ServingGeometry& g, const NetworkConfig& cfg);

/// lambda_n E_{R,theta}[lim dA_mn/dr] with the serving-distance density
/// f(R)/(2 pi): the angular route to H_k^{m-n} / v.
QuadResult angular_average_rate_per_speed(const NetworkConfig& cfg, TierIndex m, TierIndex n,
                                          const QuadratureSpec& spec = {});

struct BoundaryPoint {
  std::string curve;  // "lower_bound_arc" or "moved_arc"
  double x = 0.0;
  double y = 0.0;
};

/// Boundary of the bad region as two arcs: the part of the moved circle
/// |y - (r,0)| = phi^u - r outside the lower-bound disk, and the part of the
/// lower-bound circle |y| = R_n^lb inside the moved disk.
std::vector<BoundaryPoint> bad_region_boundary(const ServingGeometry& g, const NetworkConfig& cfg,
                                               int points_per_arc);

}  // namespace hetho
