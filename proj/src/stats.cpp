#include "hetho/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>

namespace hetho {

double student_t_quantile(double p, double dof) {
  if (!(p > 0.0 && p < 1.0) || !(dof > 0.0))
    throw std::domain_error("t quantile needs p in (0, 1) and dof > 0");
  return boost::math::quantile(boost::math::students_t(dof), p);
}

double ci95_factor(std::size_t k) {
  if (k < 2) return std::numeric_limits<double>::quiet_NaN();
  return student_t_quantile(0.975, static_cast<double>(k - 1));
}

SampleSummary summarize(std::span<const double> values) {
  SampleSummary s;
  s.count = values.size();
  if (values.empty()) return s;
  double mean = 0.0, m2 = 0.0;
  std::size_t k = 0;
  for (double x : values) {  // Welford
    ++k;
    const double d = x - mean;
    mean += d / static_cast<double>(k);
    m2 += d * (x - mean);
  }
  s.mean = mean;
  s.std_dev = k > 1 ? std::sqrt(m2 / static_cast<double>(k - 1)) : 0.0;
  return s;
}

double kolmogorov_survival(double x) {
  if (x <= 0.0) return 1.0;
  if (x < 0.2) return 1.0;  // series converges too slowly; Q(0.2) = 1 - 1e-27
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-18) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_test(std::vector<double> samples, const std::function<double(double)>& cdf) {
  KsResult out;
  out.n = samples.size();
  if (samples.empty()) return out;
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  out.statistic = d;
  const double root = std::sqrt(n);
  out.p_value = kolmogorov_survival((root + 0.12 + 0.11 / root) * d);
  return out;
}

double empirical_cdf(std::span<const double> sorted, double x) {
  if (sorted.empty()) return 0.0;
  const auto it = std::upper_bound(sorted.begin(), sorted.end(), x);
  return static_cast<double>(it - sorted.begin()) / static_cast<double>(sorted.size());
}

}  // namespace hetho
