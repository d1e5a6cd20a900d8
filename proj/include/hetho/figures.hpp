#pragma once

#include <ostream>

#include "hetho/config_io.hpp"
#include "hetho/sim.hpp"

namespace hetho {

/// CSV dataset behind one of the figure sweeps:
///   4 rates vs mean speed          5 total and 1-2 rates vs (speed, lambda_2)
///   6 rates vs (lambda_2, alpha_2) 7 forward vs reverse rates vs lambda_2
///   8 residence-time CDFs vs lambda_2 (constant speed)
///   9 rates vs the tier-2 bias, analytic only
/// Figures 7 and 8 always simulate; 4 to 6 add simulated rows when `simulate`.
/// Throws ConfigError for an unknown id or a config the figure cannot use.
void write_figure(int id, const RunConfig& run, const SimConfig& sim, bool simulate,
                  std::ostream& out);

/// The x values each figure sweeps, exposed for tests.
std::vector<double> figure_speed_grid();
std::vector<double> figure_lambda2_grid_per_km2();
std::vector<double> figure_bias_grid();

}  // namespace hetho
