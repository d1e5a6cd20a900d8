#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

namespace hetho {

struct QuadResult {
  double value = 0.0;
  double error = 0.0;
  int evaluations = 0;
  bool converged = true;
};

class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(const std::string& what, QuadResult partial)
      : std::runtime_error(what + " (achieved error " + std::to_string(partial.error) + ")"),
        partial_(partial) {}
  const QuadResult& partial() const { return partial_; }

 private:
  QuadResult partial_;
};

namespace detail {

// Kronrod 15-point extension of the 7-point Gauss rule (QUADPACK qk15).
inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a, b, value, error;
  bool operator<(const Panel& o) const { return error < o.error; }
};

template <class F>
Panel kronrod15(F& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double kronrod = fc * kKronrodWeights[7];
  double gauss = fc * kGaussWeights[3];
  double abs_sum = std::abs(kronrod);
  std::array<double, 15> fv{};
  fv[7] = fc;
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kKronrodNodes[j];
    const double f1 = f(center - dx);
    const double f2 = f(center + dx);
    fv[j] = f1;
    fv[14 - j] = f2;
    kronrod += kKronrodWeights[j] * (f1 + f2);
    abs_sum += kKronrodWeights[j] * (std::abs(f1) + std::abs(f2));
    if (j % 2 == 1) gauss += kGaussWeights[j / 2] * (f1 + f2);
  }
  const double mean = 0.5 * kronrod;
  double asc = kKronrodWeights[7] * std::abs(fc - mean);
  for (int j = 0; j < 7; ++j)
    asc += kKronrodWeights[j] * (std::abs(fv[j] - mean) + std::abs(fv[14 - j] - mean));

  const double value = kronrod * half;
  asc *= std::abs(half);
  double err = std::abs((kronrod - gauss) * half);
  if (asc != 0.0 && err != 0.0) err = asc * std::min(1.0, std::pow(200.0 * err / asc, 1.5));
  const double round = 50.0 * std::numeric_limits<double>::epsilon() * abs_sum * std::abs(half);
  err = std::max(err, round);
  return {a, b, value, err};
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod (7/15) on [a, b]. Interior kinks listed in
/// `breakpoints` seed the initial partition. Returns converged=false instead of
/// throwing when the subdivision budget runs out.
template <class F>
QuadResult integrate_adaptive(F&& f, double a, double b, double rel_tol, double abs_tol,
                              int max_subdivisions = 2000,
                              const std::vector<double>& breakpoints = {}) {
  QuadResult out;
  if (a == b) return out;
  std::vector<double> cuts{a};
  for (double p : breakpoints)
    if (p > a && p < b) cuts.push_back(p);
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());

  std::priority_queue<detail::Panel> heap;
  double total = 0.0, total_err = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    auto p = detail::kronrod15(f, cuts[i], cuts[i + 1]);
    out.evaluations += 15;
    total += p.value;
    total_err += p.error;
    heap.push(p);
  }
  int splits = 0;
  while (total_err > std::max(abs_tol, rel_tol * std::abs(total))) {
    if (splits >= max_subdivisions) {
      out.converged = false;
      break;
    }
    auto worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {  // interval at machine resolution
      out.converged = false;
      heap.push(worst);
      break;
    }
    auto left = detail::kronrod15(f, worst.a, mid);
    auto right = detail::kronrod15(f, mid, worst.b);
    out.evaluations += 30;
    ++splits;
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
  }
  // Re-sum from the panels to shed drift from the running updates.
  total = 0.0;
  total_err = 0.0;
  while (!heap.empty()) {
    total += heap.top().value;
    total_err += heap.top().error;
    heap.pop();
  }
  out.value = total;
  out.error = total_err;
  return out;
}

/// Double-exponential (tanh-sinh) quadrature on [a, b]. The integrand is called
/// as f(x, x - a, b - x) with both distances computed without cancellation, so
/// integrable endpoint singularities can be evaluated accurately.
template <class F>
QuadResult integrate_tanh_sinh(F&& f, double a, double b, double rel_tol, int max_levels = 12) {
  constexpr double half_pi = 1.57079632679489661923;
  const double half = 0.5 * (b - a);
  QuadResult out;
  if (half == 0.0) return out;

  // Truncate the abscissa range where the weights underflow.
  const double t_max = 6.5;
  auto node = [&](double t, double& sum) {
    const double s = half_pi * std::sinh(t);
    const double c = std::cosh(s);
    const double w = half_pi * std::cosh(t) / (c * c);
    // Distance of the node from each endpoint: half * (1 -/+ tanh(s)).
    const double e = std::exp(-2.0 * std::abs(s));
    const double near = half * 2.0 * e / (1.0 + e);
    const double far = 2.0 * half - near;
    const double da = s < 0 ? near : far;
    const double db = s < 0 ? far : near;
    const double x = s < 0 ? a + da : b - db;
    const double fx = f(x, da, db);
    if (std::isfinite(fx)) sum += w * fx;
    ++out.evaluations;
  };

  double h = 1.0;
  double sum = 0.0;
  node(0.0, sum);
  for (double t = h; t <= t_max; t += h) {
    node(t, sum);
    node(-t, sum);
  }
  double estimate = sum * h * half;
  for (int level = 1; level <= max_levels; ++level) {
    h *= 0.5;
    for (double t = h; t <= t_max; t += 2.0 * h) {
      node(t, sum);
      node(-t, sum);
    }
    const double next = sum * h * half;
    out.error = std::abs(next - estimate);
    estimate = next;
    if (level >= 3 && out.error <= rel_tol * std::abs(estimate)) {
      out.value = estimate;
      return out;
    }
  }
  out.value = estimate;
  out.converged = false;
  return out;
}

}  // namespace hetho
