#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "hetho/config_io.hpp"
#include "hetho/sim.hpp"

namespace hetho {

/// Simulator flags as given on the command line; unset values come from the profile.
struct SimFlags {
  std::string profile = "desk";
  std::optional<std::uint64_t> seed;
  std::optional<int> replications;
  std::optional<double> duration;
  std::optional<double> time_step;
  std::optional<double> count_radius;
  std::optional<double> disk_radius;
  std::optional<double> residence_horizon;
  std::string model = "straight";
  bool keep_speed = false;
};

/// desk: 5 km disk, 2000 s, 8 replications, 3 km counting disk.
/// paper: 10 km disk, 10^4 s, 8 replications, counting disk of area S.
SimConfig simulation_profile(const std::string& name);

SimConfig resolve_sim_config(const RunConfig& run, const SimFlags& flags);

/// Entry point of the `hetho` tool. Returns the process exit code:
/// 0 ok, 1 tolerance or numerical failure, 2 usage or config error.
/// Errors are also written to `err` as one JSON object.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hetho
