#include <doctest.h>

#include <cmath>
#include <numbers>

#include "hetho/geometry.hpp"

using namespace hetho;

namespace {

constexpr double kPi = std::numbers::pi;

NetworkConfig make(std::vector<TierParams> tiers) {
  NetworkConfig cfg;
  cfg.tiers = std::move(tiers);
  cfg.user_density = 1e-4;
  return validate_config(cfg);
}

NetworkConfig operating_point() { return make({{1e-6, 1.0, 3.5, 1.0}, {2e-6, 0.2, 3.5, 1.0}}); }
NetworkConfig unequal() { return make({{1e-6, 1.0, 3.5, 1.0}, {2e-6, 0.2, 4.5, 1.0}}); }

double relative(double a, double b) { return std::abs(a - b) / std::abs(b); }

// Area of the intersection of two disks with radii a, b and centre distance d.
double lens_area(double a, double b, double d) {
  if (d >= a + b) return 0.0;
  if (d <= std::abs(a - b)) return kPi * std::pow(std::min(a, b), 2);
  const double ca = std::clamp((d * d + a * a - b * b) / (2.0 * d * a), -1.0, 1.0);
  const double cb = std::clamp((d * d + b * b - a * a) / (2.0 * d * b), -1.0, 1.0);
  return a * a * std::acos(ca) + b * b * std::acos(cb) -
         0.5 * std::sqrt((-d + a + b) * (d + a - b) * (d - a + b) * (d + a + b));
}

// The bad region is the moved disk minus the lower-bound disk.
double bad_area_exact(const ServingGeometry& g, const NetworkConfig& cfg) {
  const double lb = distance_lower_bound(cfg, g.serving_tier, g.candidate_tier, g.serving_distance);
  const double moved = moved_lower_bound(g, cfg);
  return kPi * moved * moved - lens_area(lb, moved, g.displacement);
}

double fd_derivative(ServingGeometry g, const NetworkConfig& cfg) {
  const double h1 = 1e-2 * g.serving_distance, h2 = 1e-3 * g.serving_distance;
  g.displacement = h1;
  const double d1 = bad_region_area_numeric(g, cfg).value / h1;
  g.displacement = h2;
  const double d2 = bad_region_area_numeric(g, cfg).value / h2;
  return (h1 * d2 - h2 * d1) / (h1 - h2);
}

}  // namespace

TEST_CASE("x offset") {
  const auto cfg = operating_point();
  ServingGeometry g{100.0, 0.7, 0.0, 0, 1};
  const double lb = distance_lower_bound(cfg, 0, 1, 100.0);
  CHECK(relative(x_offset(g, cfg), -lb * lb) < 1e-14);
  CHECK(x_offset({100.0, 0.3, 0.0, 0, 0}, cfg) == doctest::Approx(-1e4).epsilon(1e-15));
  // 40-digit evaluation of the same expression.
  CHECK(relative(x_offset({100.0, kPi / 2, 0.01, 0, 1}, cfg), -3986.47057114208289472119) < 1e-13);
  for (const auto& c : {operating_point(), unequal()}) {
    for (double theta : {0.0, 1.0, 2.5}) {
      ServingGeometry s{150.0, theta, 0.0, 1, 0};
      const double h = 1e-4;
      s.displacement = h;
      const double up = x_offset(s, c);
      s.displacement = 0.0;
      const double fd = (up - x_offset(s, c)) / h;
      CAPTURE(theta);
      CHECK(std::abs(fd - x_offset_slope_at_origin(s, c)) < 1e-3 * std::abs(-x_offset(s, c)) / 150.0);
    }
  }
}

TEST_CASE("bad region indicator") {
  const auto cfg = operating_point();
  const ServingGeometry g{100.0, 2.0, 1.0, 0, 1};
  const double lb = distance_lower_bound(cfg, 0, 1, 100.0);
  CHECK_FALSE(bad_region_indicator(lb * 0.999, 0.0, g, cfg));
  CHECK_FALSE(bad_region_indicator(lb, 0.0, g, cfg));
  CHECK_FALSE(bad_region_indicator(lb * 1.0001, kPi, g, cfg));
  CHECK_THROWS(bad_region_indicator(10.0, 0.0, {100.0, 2.0, 0.0, 0, 1}, cfg));

  // Membership agrees with the explicit set {|y| > R^lb, |y - (r,0)| < R^lb(r)}.
  auto rng = make_stream(11, StreamKind::test, 0, 0);
  const double moved = moved_lower_bound(g, cfg);
  int agree = 0, inside = 0;
  for (int i = 0; i < 20000; ++i) {
    const double rr = lb + (moved + 2.0 - lb) * rng.uniform();
    const double a = 2.0 * kPi * rng.uniform();
    const double x = rr * std::cos(a), y = rr * std::sin(a);
    const bool expected = rr > lb && std::hypot(x - g.displacement, y) < moved;
    const bool got = bad_region_indicator(rr, a, g, cfg);
    agree += expected == got;
    inside += got;
  }
  CHECK(agree == 20000);
  CHECK(inside > 0);
}

TEST_CASE("case classification matches the indicator") {
  const auto cfg = operating_point();
  auto rng = make_stream(12, StreamKind::test, 0, 0);
  for (TierIndex m = 0; m < 2; ++m) {
    for (TierIndex n = 0; n < 2; ++n) {
      for (double theta = 0.05; theta < kPi; theta += 0.1) {
        ServingGeometry g{120.0, theta, 1e-3, m, n};
        const double lb = distance_lower_bound(cfg, m, n, 120.0);
        const auto c = classify_bad_region(g, cfg);
        const double down = phi_down(g, cfg), up = phi_up(g, cfg);
        CAPTURE(theta);
        if (c == BadRegionCase::empty) {
          CHECK(up <= lb);
          CHECK(bad_region_area_numeric(g, cfg).value == 0.0);
        } else if (c == BadRegionCase::enclosing) {
          // Every angle is bad just outside the lower bound.
          CHECK(down > lb);
          const double rr = 0.5 * (lb + down);
          for (int k = 0; k < 16; ++k) CHECK(bad_region_indicator(rr, 2.0 * kPi * rng.uniform(), g, cfg));
        } else {
          CHECK(down <= lb);
          CHECK(up > lb);
        }
      }
    }
  }
}

TEST_CASE("numeric area matches the exact disk-difference area") {
  for (const auto& cfg : {operating_point(), unequal()}) {
    for (TierIndex m = 0; m < 2; ++m)
      for (TierIndex n = 0; n < 2; ++n)
        for (double theta : {0.3, 1.2, kPi / 2, 2.2, 3.0})
          for (double r : {1.0, 10.0, 40.0}) {
            const ServingGeometry g{100.0, theta, r, m, n};
            const double exact = bad_area_exact(g, cfg);
            const double numeric = bad_region_area_numeric(g, cfg).value;
            CAPTURE(m);
            CAPTURE(n);
            CAPTURE(theta);
            CAPTURE(r);
            if (exact < 1e-9 * r * 100.0)
              CHECK(numeric < 1e-8 * r * 100.0);
            else
              CHECK(relative(numeric, exact) < 1e-8);
          }
  }
}

TEST_CASE("numeric area agrees with hit counting") {
  const auto cfg = operating_point();
  auto rng = make_stream(13, StreamKind::oracle, 0, 0);
  const ServingGeometry g{100.0, kPi, 0.5, 0, 0};
  const auto mc = bad_region_area_monte_carlo(g, cfg, 400000, rng);
  const double numeric = bad_region_area_numeric(g, cfg).value;
  CHECK(std::abs(mc.value - numeric) < 0.01 * numeric);
  CHECK(std::abs(mc.value - numeric) < 3.0 * mc.std_error);
  for (const ServingGeometry h : {ServingGeometry{80.0, 1.9, 3.0, 0, 1}, ServingGeometry{200.0, 2.6, 5.0, 1, 0}}) {
    const auto est = bad_region_area_monte_carlo(h, unequal(), 200000, rng);
    CHECK(std::abs(est.value - bad_region_area_numeric(h, unequal()).value) < 3.0 * est.std_error);
  }
}

TEST_CASE("area vanishes as the displacement goes to zero") {
  const auto cfg = operating_point();
  double last = 1e300;
  for (double r = 1.0; r > 1e-5; r /= 10.0) {
    const double a = bad_region_area_numeric({100.0, 2.0, r, 0, 1}, cfg).value;
    CHECK(a < last);
    last = a;
  }
  CHECK(last < 1e-3 * bad_region_area_numeric({100.0, 2.0, 1.0, 0, 1}, cfg).value);
  CHECK(bad_region_area_numeric({100.0, 2.0, 0.0, 0, 1}, cfg).value == 0.0);
  // Moving straight at the serving station never creates a bad region.
  CHECK(bad_region_area_numeric({100.0, 0.0, 1.0, 0, 0}, cfg).value == 0.0);
}

TEST_CASE("derivative closed-form examples") {
  const auto cfg = operating_point();
  const double lb01 = distance_lower_bound(cfg, 0, 1, 100.0);
  CHECK(relative(bad_region_area_derivative({100.0, kPi / 2, 0.0, 0, 1}, cfg), 2.0 * lb01) < 1e-14);
  const double lb10 = distance_lower_bound(cfg, 1, 0, 100.0);
  REQUIRE(lb10 > 100.0);
  CHECK(relative(bad_region_area_derivative({100.0, kPi, 0.0, 1, 0}, cfg), 2.0 * kPi * lb10 * lb10 / 100.0) <
        1e-14);
  CHECK(bad_region_area_derivative({100.0, 0.1, 0.0, 1, 0}, cfg) == 0.0);
  CHECK(classify_bad_region({100.0, 0.1, 0.0, 1, 0}, cfg) == BadRegionCase::empty);
  CHECK(classify_bad_region({100.0, kPi, 0.0, 1, 0}, cfg) == BadRegionCase::enclosing);
  const auto terms = derivative_terms({100.0, kPi, 0.0, 1, 0}, cfg);
  CHECK(terms.h2 == 0.0);
  CHECK(terms.h3 == 0.0);
}

TEST_CASE("derivative is continuous across the branch boundaries") {
  for (const auto& cfg : {operating_point(), unequal()}) {
    for (const auto [m, n] : {std::pair<TierIndex, TierIndex>{0, 1}, {1, 0}, {0, 0}}) {
      const double big_r = 100.0;
      const double lb = distance_lower_bound(cfg, m, n, big_r);
      const double k = cfg.tier(m).pathloss_exponent / cfg.tier(n).pathloss_exponent;
      for (double edge : {1.0, -1.0}) {
        const double c = edge * big_r / (k * lb);
        if (std::abs(c) > 1.0) continue;
        const double theta = std::acos(c);
        const double below = bad_region_area_derivative({big_r, theta - 1e-9, 0.0, m, n}, cfg);
        const double above = bad_region_area_derivative({big_r, theta + 1e-9, 0.0, m, n}, cfg);
        CHECK(std::abs(below - above) < 1e-6 * lb);
      }
    }
  }
}

TEST_CASE("derivative matches extrapolated finite differences of the area") {
  const auto cfg = operating_point();
  for (TierIndex m = 0; m < 2; ++m)
    for (TierIndex n = 0; n < 2; ++n)
      for (double theta : {0.0, kPi / 4, kPi / 2, 3 * kPi / 4, kPi})
        for (double big_r : {50.0, 100.0, 300.0}) {
          const ServingGeometry g{big_r, theta, 0.0, m, n};
          const double exact = bad_region_area_derivative(g, cfg);
          const double fd = fd_derivative(g, cfg);
          CAPTURE(m);
          CAPTURE(n);
          CAPTURE(theta);
          CAPTURE(big_r);
          if (exact == 0.0)
            CHECK(std::abs(fd) < 0.02 * distance_lower_bound(cfg, m, n, big_r));
          else
            CHECK(relative(fd, exact) < 0.02);
        }
}

TEST_CASE("angular average reproduces the rate per speed") {
  for (const auto& cfg : {operating_point(), unequal()})
    for (TierIndex m = 0; m < 2; ++m)
      for (TierIndex n = 0; n < 2; ++n) {
        CAPTURE(m);
        CAPTURE(n);
        CHECK(relative(angular_average_rate_per_speed(cfg, m, n).value,
                       pairwise_rate_per_speed(cfg, m, n).value) < 1e-6);
      }
}

TEST_CASE("angular integrals of the three terms") {
  const auto cfg = operating_point();
  // (2,1): R^lb > R, all three terms present.
  const auto t = angular_integrals(100.0, 1, 0, cfg);
  CHECK(t.h1 > 0.0);
  CHECK(t.h2 != 0.0);
  CHECK(t.h3 > 0.0);
  // For m = n the enclosing case never occurs.
  CHECK(angular_integrals(100.0, 0, 0, cfg).h1 == 0.0);
  // m = n, R^lb = R: twice int_0^pi 2R sin(t) - 2R t cos(t) dt = 16R.
  CHECK(relative(angular_integrals(100.0, 0, 0, cfg).sum(), 1600.0) < 1e-10);
}

TEST_CASE("keep-link probability") {
  const auto cfg = operating_point();
  CHECK(keep_link_probability({100.0, 2.0, 0.0, 0, 0}, cfg) == 1.0);
  double last = 1.0;
  for (double r = 0.5; r < 60.0; r *= 2.0) {
    const double p = keep_link_probability({100.0, 2.0, r, 0, 0}, cfg);
    CHECK(p <= last);
    CHECK(p > 0.0);
    last = p;
  }
  const ServingGeometry g{100.0, 2.0, 1e-3, 0, 0};
  const double loss = 1.0 - keep_link_probability(g, cfg);
  CHECK(relative(loss, 1e-3 * keep_link_loss_slope(g, cfg)) < 1e-3);
}

TEST_CASE("boundary polylines lie on their circles") {
  const auto cfg = operating_point();
  const ServingGeometry g{100.0, 2.5, 20.0, 0, 1};
  const auto pts = bad_region_boundary(g, cfg, 360);
  const double lb = distance_lower_bound(cfg, 0, 1, 100.0);
  const double moved = moved_lower_bound(g, cfg);
  int moved_count = 0, lower_count = 0;
  for (const auto& p : pts) {
    if (p.curve == "moved_arc") {
      ++moved_count;
      CHECK(std::abs(std::hypot(p.x - 20.0, p.y) - moved) < 1e-9 * moved);
      CHECK(std::hypot(p.x, p.y) >= lb);
    } else {
      ++lower_count;
      CHECK(std::abs(std::hypot(p.x, p.y) - lb) < 1e-9 * lb);
    }
  }
  CHECK(moved_count > 0);
  CHECK(lower_count > 0);
}
