#include "hetho/report.hpp"

#include <charconv>
#include <cmath>

#include <json.hpp>

namespace hetho {

std::string format_number(double x) {
  if (std::isnan(x)) return "";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

void write_rate_csv(std::ostream& out, const RateMatrix& rates) {
  out << kRateCsvHeader << '\n';
  const bool sim = rates.provenance == Provenance::simulated;
  const auto cell = [](const std::optional<Eigen::MatrixXd>& m, Eigen::Index i, Eigen::Index j) {
    return m ? format_number((*m)(i, j)) : std::string();
  };
  for (Eigen::Index m = 0; m < rates.pairwise.rows(); ++m)
    for (Eigen::Index n = 0; n < rates.pairwise.cols(); ++n)
      out << m + 1 << ',' << n + 1 << ',' << format_number(rates.pairwise(m, n)) << ','
          << cell(rates.ci_halfwidth, m, n) << ',' << cell(rates.events, m, n) << ','
          << (sim && rates.sim_time ? format_number(*rates.sim_time) : "") << '\n';
  out << "total,total," << format_number(rates.total) << ','
      << (rates.total_ci_halfwidth ? format_number(*rates.total_ci_halfwidth) : "") << ','
      << (rates.events ? format_number(rates.events->sum()) : "") << ','
      << (sim && rates.sim_time ? format_number(*rates.sim_time) : "") << '\n';
}

void write_association_csv(std::ostream& out, const std::vector<double>& gamma) {
  out << "m,gamma\n";
  for (std::size_t m = 0; m < gamma.size(); ++m) out << m + 1 << ',' << format_number(gamma[m]) << '\n';
}

void write_per_speed_csv(std::ostream& out, const Eigen::MatrixXd& per_speed) {
  out << "m,n,rate_per_speed_per_m\n";
  for (Eigen::Index m = 0; m < per_speed.rows(); ++m)
    for (Eigen::Index n = 0; n < per_speed.cols(); ++n)
      out << m + 1 << ',' << n + 1 << ',' << format_number(per_speed(m, n)) << '\n';
}

void write_stats_jsonl(std::ostream& out, const std::vector<HandoverStats>& stats) {
  for (const auto& s : stats) {
    nlohmann::json counts = nlohmann::json::array();
    for (Eigen::Index m = 0; m < s.counts.rows(); ++m) {
      nlohmann::json row = nlohmann::json::array();
      for (Eigen::Index n = 0; n < s.counts.cols(); ++n) row.push_back(s.counts(m, n));
      counts.push_back(row);
    }
    nlohmann::json residence_count = nlohmann::json::array();
    nlohmann::json residence_mean = nlohmann::json::array();
    for (const auto& r : s.residence) {
      residence_count.push_back(r.size());
      double sum = 0.0;
      for (double x : r) sum += x;
      residence_mean.push_back(r.empty() ? nlohmann::json(nullptr)
                                         : nlohmann::json(sum / static_cast<double>(r.size())));
    }
    nlohmann::json j = {{"replication", s.replication},
                        {"seed", s.seed},
                        {"config_hash", s.config_hash},
                        {"time_step_s", s.time_step},
                        {"ue_count", s.ue_count},
                        {"station_count", s.station_count},
                        {"ue_time_in_region_s", s.ue_time_in_region},
                        {"counts", counts},
                        {"residence_count", residence_count},
                        {"residence_mean_s", residence_mean}};
    out << j.dump() << '\n';
  }
}

}  // namespace hetho
