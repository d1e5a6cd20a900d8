#include <doctest.h>

#include <cmath>
#include <numbers>

#include "hetho/quadrature.hpp"

using namespace hetho;

TEST_CASE("Gauss-Kronrod on smooth and mildly singular integrands") {
  auto e = integrate_adaptive([](double x) { return std::exp(x); }, 0.0, 1.0, 1e-13, 0.0);
  CHECK(e.converged);
  CHECK(e.value == doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-14));
  CHECK(e.error < 1e-12);

  auto s = integrate_adaptive([](double x) { return std::sqrt(x); }, 0.0, 1.0, 1e-12, 0.0);
  CHECK(s.converged);
  CHECK(s.value == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("breakpoints handle kinks") {
  auto f = [](double x) { return std::abs(x - 0.3); };
  auto r = integrate_adaptive(f, 0.0, 1.0, 1e-12, 0.0, 50, {0.3});
  CHECK(r.converged);
  CHECK(r.value == doctest::Approx(0.045 + 0.245).epsilon(1e-13));
}

TEST_CASE("non-convergence is reported, not hidden") {
  auto f = [](double x) { return std::sin(1.0 / x); };
  auto r = integrate_adaptive(f, 1e-6, 1.0, 1e-15, 0.0, 5);
  CHECK_FALSE(r.converged);
  CHECK(r.error > 0.0);
}

TEST_CASE("tanh-sinh with endpoint singularities") {
  auto f = [](double x, double from_a, double to_b) {
    return 1.0 / std::sqrt(from_a * to_b) + 0.0 * x;
  };
  auto r = integrate_tanh_sinh(f, 0.0, 1.0, 1e-13);
  CHECK(r.converged);
  CHECK(r.value == doctest::Approx(std::numbers::pi).epsilon(1e-12));

  auto g = [](double x, double, double) { return std::log(x); };
  auto l = integrate_tanh_sinh(g, 0.0, 1.0, 1e-12);
  CHECK(l.converged);
  CHECK(l.value == doctest::Approx(-1.0).epsilon(1e-12));
}
