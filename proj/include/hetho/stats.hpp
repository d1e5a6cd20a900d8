#pragma once

#include <functional>
#include <span>
#include <vector>

namespace hetho {

/// Quantile of Student's t distribution with `dof` degrees of freedom, p in (0, 1).
double student_t_quantile(double p, double dof);

/// Two-sided 95% half-width factor for the mean of k replications: the
/// t quantile with k - 1 degrees of freedom. NaN when k < 2.
double ci95_factor(std::size_t k);

struct SampleSummary {
  std::size_t count = 0;
  double mean = 0.0;
  double std_dev = 0.0;  // unbiased (n - 1)
};

SampleSummary summarize(std::span<const double> values);

/// Survival function of the limiting Kolmogorov distribution,
/// Q(x) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 x^2).
double kolmogorov_survival(double x);

struct KsResult {
  double statistic = 0.0;  // sup |F_n - F|
  double p_value = 1.0;
  std::size_t n = 0;
};

/// One-sample two-sided Kolmogorov-Smirnov test. The p-value uses Stephens'
/// small-sample correction (sqrt(n) + 0.12 + 0.11 / sqrt(n)) D.
KsResult ks_test(std::vector<double> samples, const std::function<double(double)>& cdf);

/// Empirical CDF of `sorted` at x.
double empirical_cdf(std::span<const double> sorted, double x);

}  // namespace hetho
