#include "hetho/figures.hpp"

#include <algorithm>
#include <cmath>

#include "hetho/report.hpp"
#include "hetho/stats.hpp"

namespace hetho {

namespace {

RateMatrix simulate(const RunConfig& run, SimConfig sim) {
  sim.mobility.speed = run.speed;
  return estimate_rate_matrix(run_replications(run.network, sim), run.network);
}

RateMatrix analytic(const RunConfig& run) {
  return total_handover_rate(run.network, run.speed, run.users);
}

std::string provenance_name(const RateMatrix& r) {
  return r.provenance == Provenance::analytic ? "analytic" : "simulated";
}

std::string ci_text(const RateMatrix& r, Eigen::Index m, Eigen::Index n) {
  return r.ci_halfwidth ? format_number((*r.ci_halfwidth)(m, n)) : "";
}

// prefix,m,n,provenance,rate_hz,ci_halfwidth for every pair and the total.
void write_rows(std::ostream& out, const std::string& prefix, const RateMatrix& r) {
  for (Eigen::Index m = 0; m < r.pairwise.rows(); ++m)
    for (Eigen::Index n = 0; n < r.pairwise.cols(); ++n)
      out << prefix << m + 1 << ',' << n + 1 << ',' << provenance_name(r) << ','
          << format_number(r.pairwise(m, n)) << ',' << ci_text(r, m, n) << '\n';
  out << prefix << "total,total," << provenance_name(r) << ',' << format_number(r.total) << ','
      << (r.total_ci_halfwidth ? format_number(*r.total_ci_halfwidth) : "") << '\n';
}

void require_two_tiers(const RunConfig& run, int id) {
  if (run.network.tier_count() < 2)
    throw ConfigError("figure " + std::to_string(id) + " needs at least two tiers");
}

RunConfig with_speed(const RunConfig& run, double mean) {
  return apply_parameter(run, "speed.mean", mean);
}

RunConfig with_lambda2(const RunConfig& run, double per_km2) {
  return apply_parameter(run, "tiers[1].density", per_km2);
}

void figure_rates_vs_speed(const RunConfig& run, const SimConfig& sim, bool sim_rows,
                           std::ostream& out) {
  out << "v_mean_mps,m,n,provenance,rate_hz,ci_halfwidth\n";
  for (double v : figure_speed_grid()) {
    const auto point = with_speed(run, v);
    const auto prefix = format_number(v) + ",";
    write_rows(out, prefix, analytic(point));
    if (sim_rows) write_rows(out, prefix, simulate(point, sim));
  }
}

void figure_speed_and_density(const RunConfig& run, const SimConfig& sim, bool sim_rows,
                              std::ostream& out) {
  out << "v_mean_mps,lambda2_per_km2,m,n,provenance,rate_hz,ci_halfwidth\n";
  auto emit = [&](const std::string& prefix, const RateMatrix& r) {
    out << prefix << "1,2," << provenance_name(r) << ',' << format_number(r.pairwise(0, 1)) << ','
        << ci_text(r, 0, 1) << '\n';
    out << prefix << "total,total," << provenance_name(r) << ',' << format_number(r.total) << ','
        << (r.total_ci_halfwidth ? format_number(*r.total_ci_halfwidth) : "") << '\n';
  };
  for (double lambda2 : figure_lambda2_grid_per_km2()) {
    for (double v : figure_speed_grid()) {
      const auto point = with_speed(with_lambda2(run, lambda2), v);
      const auto prefix = format_number(v) + "," + format_number(lambda2) + ",";
      emit(prefix, analytic(point));
      if (sim_rows) emit(prefix, simulate(point, sim));
    }
  }
}

void figure_density_and_exponent(const RunConfig& run, const SimConfig& sim, bool sim_rows,
                                 std::ostream& out) {
  out << "lambda2_per_km2,alpha2,m,n,provenance,rate_hz,ci_halfwidth\n";
  for (double alpha2 : {3.0, 3.5, 4.0, 4.5}) {
    for (double lambda2 : {0.5, 1.0, 2.0, 4.0, 8.0}) {
      const auto point = apply_parameter(with_lambda2(run, lambda2), "tiers[1].alpha", alpha2);
      const auto prefix = format_number(lambda2) + "," + format_number(alpha2) + ",";
      write_rows(out, prefix, analytic(point));
      if (sim_rows) write_rows(out, prefix, simulate(point, sim));
    }
  }
}

void figure_forward_reverse(const RunConfig& run, const SimConfig& sim, std::ostream& out) {
  out << "lambda2_per_km2,m,n,provenance,forward_hz,forward_ci,reverse_hz,reverse_ci\n";
  for (double lambda2 : figure_lambda2_grid_per_km2()) {
    const auto point = with_lambda2(run, lambda2);
    for (const RateMatrix& r : {analytic(point), simulate(point, sim)}) {
      for (Eigen::Index m = 0; m < r.pairwise.rows(); ++m)
        for (Eigen::Index n = m + 1; n < r.pairwise.cols(); ++n)
          out << format_number(lambda2) << ',' << m + 1 << ',' << n + 1 << ','
              << provenance_name(r) << ',' << format_number(r.pairwise(m, n)) << ','
              << ci_text(r, m, n) << ',' << format_number(r.pairwise(n, m)) << ','
              << ci_text(r, n, m) << '\n';
    }
  }
}

void figure_residence(const RunConfig& run, const SimConfig& sim, std::ostream& out) {
  out << "lambda2_per_km2,m,t_s,empirical_cdf,analytic_cdf,samples\n";
  const double speed = run.speed.mean();
  if (!(speed > 0.0)) throw ConfigError("figure 8 needs a positive mean speed");
  for (double lambda2 : figure_lambda2_grid_per_km2()) {
    auto point = with_lambda2(run, lambda2);
    point.speed = SpeedModel::constant(speed);
    SimConfig s = sim;
    s.mobility.speed = point.speed;
    const auto stats = run_replications(point.network, s);
    for (TierIndex m = 0; m < point.network.tier_count(); ++m) {
      std::vector<double> samples;
      for (const auto& st : stats)
        samples.insert(samples.end(), st.residence[m].begin(), st.residence[m].end());
      std::sort(samples.begin(), samples.end());
      const auto law = residence_time_distribution(point.network, m, speed);
      for (int i = 0; i <= 40; ++i) {
        const double t = law.mean * 4.0 * i / 40.0;
        out << format_number(lambda2) << ',' << m + 1 << ',' << format_number(t) << ','
            << (samples.empty() ? "" : format_number(empirical_cdf(samples, t))) << ','
            << format_number(law.cdf(t)) << ',' << samples.size() << '\n';
      }
    }
  }
}

void figure_bias(const RunConfig& run, std::ostream& out) {
  out << "bias2,m,n,rate_hz\n";
  for (double b : figure_bias_grid()) {
    const auto r = analytic(apply_parameter(run, "tiers[1].bias", b));
    for (Eigen::Index m = 0; m < r.pairwise.rows(); ++m)
      for (Eigen::Index n = 0; n < r.pairwise.cols(); ++n)
        out << format_number(b) << ',' << m + 1 << ',' << n + 1 << ','
            << format_number(r.pairwise(m, n)) << '\n';
    out << format_number(b) << ",total,total," << format_number(r.total) << '\n';
  }
}

}  // namespace

std::vector<double> figure_speed_grid() {
  std::vector<double> v;
  for (int i = 1; i <= 10; ++i) v.push_back(i);
  return v;
}

std::vector<double> figure_lambda2_grid_per_km2() { return {1.0, 2.0, 4.0}; }

std::vector<double> figure_bias_grid() {
  std::vector<double> b;
  for (int i = 0; i <= 10; ++i) b.push_back((10.0 + i) / 10.0);
  return b;
}

void write_figure(int id, const RunConfig& run, const SimConfig& sim, bool simulate_rows,
                  std::ostream& out) {
  switch (id) {
    case 4:
      figure_rates_vs_speed(run, sim, simulate_rows, out);
      return;
    case 5:
      require_two_tiers(run, id);
      figure_speed_and_density(run, sim, simulate_rows, out);
      return;
    case 6:
      require_two_tiers(run, id);
      figure_density_and_exponent(run, sim, simulate_rows, out);
      return;
    case 7:
      require_two_tiers(run, id);
      figure_forward_reverse(run, sim, out);
      return;
    case 8:
      require_two_tiers(run, id);
      figure_residence(run, sim, out);
      return;
    case 9:
      require_two_tiers(run, id);
      figure_bias(run, out);
      return;
    default:
      throw ConfigError("unknown figure id " + std::to_string(id) + " (expected 4 to 9)");
  }
}

}  // namespace hetho
