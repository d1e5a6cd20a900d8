#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "hetho/analytic.hpp"
#include "hetho/sim.hpp"

namespace hetho {

/// Shortest decimal text that parses back to the same double; NaN is empty.
std::string format_number(double x);

inline constexpr const char* kRateCsvHeader = "m,n,rate_hz,ci_halfwidth,events,sim_time_s";

/// One row per ordered tier pair (1-based) plus a `total` row. Simulation-only
/// columns are left empty for analytic matrices.
void write_rate_csv(std::ostream& out, const RateMatrix& rates);

/// m,gamma
void write_association_csv(std::ostream& out, const std::vector<double>& gamma);

/// m,n,rate_per_speed_per_m
void write_per_speed_csv(std::ostream& out, const Eigen::MatrixXd& per_speed);

/// One JSON object per line per replication.
void write_stats_jsonl(std::ostream& out, const std::vector<HandoverStats>& stats);

}  // namespace hetho
