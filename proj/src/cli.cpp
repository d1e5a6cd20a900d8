#include "hetho/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "hetho/analytic.hpp"
#include "hetho/figures.hpp"
#include "hetho/geometry.hpp"
#include "hetho/report.hpp"

namespace hetho {

namespace {

namespace fs = std::filesystem;

// Either stdout or a file inside --out.
class Output {
 public:
  Output(std::ostream& fallback, const std::string& dir, const std::string& name) {
    if (dir.empty()) {
      stream_ = &fallback;
      return;
    }
    fs::create_directories(dir);
    file_.open(fs::path(dir) / name);
    if (!file_) throw std::runtime_error("cannot write " + (fs::path(dir) / name).string());
    stream_ = &file_;
  }
  std::ostream& operator*() { return *stream_; }

 private:
  std::ofstream file_;
  std::ostream* stream_ = nullptr;
};

void report_error(std::ostream& err, const std::string& kind, const std::string& message) {
  err << nlohmann::json{{"error", kind}, {"message", message}}.dump() << '\n';
}

void add_sim_flags(CLI::App* sub, SimFlags& f) {
  sub->add_option("--profile", f.profile, "desk or paper")
      ->check(CLI::IsMember({"desk", "paper"}));
  sub->add_option("--seed", f.seed, "base seed");
  sub->add_option("--replications", f.replications, "independent deployments");
  sub->add_option("--duration", f.duration, "simulated seconds per replication");
  sub->add_option("--dt", f.time_step, "time step in seconds (must divide the duration)");
  sub->add_option("--count-radius", f.count_radius, "radius of the counting disk in metres");
  sub->add_option("--disk-radius", f.disk_radius, "radius of the deployment disk in metres");
  sub->add_option("--horizon", f.residence_horizon,
                  "residence intervals must start this long before the end");
  sub->add_option("--model", f.model, "walking model")
      ->check(CLI::IsMember({"straight", "rwp"}));
  sub->add_flag("--keep-speed", f.keep_speed, "RWP keeps each UE's speed at heading changes");
}

double relative_gap(double analytic, double simulated) {
  if (analytic == 0.0) return simulated == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return std::abs(simulated - analytic) / std::abs(analytic);
}

int cmd_analytic(const RunConfig& run, const std::string& out_dir, std::ostream& out) {
  const auto& net = run.network;
  const auto tiers = static_cast<Eigen::Index>(net.tier_count());
  const auto rates = total_handover_rate(net, run.speed, run.users);
  std::vector<double> gamma;
  Eigen::MatrixXd per_speed(tiers, tiers);
  for (TierIndex m = 0; m < net.tier_count(); ++m) {
    gamma.push_back(tier_association_probability(net, m).value);
    for (TierIndex n = 0; n < net.tier_count(); ++n)
      per_speed(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n)) =
          pairwise_rate_per_speed(net, m, n).value;
  }
  Output main(out, out_dir, "rates.csv");
  write_rate_csv(*main, rates);
  if (out_dir.empty()) {
    out << '\n';
    write_association_csv(out, gamma);
    out << '\n';
    write_per_speed_csv(out, per_speed);
  } else {
    Output g(out, out_dir, "gamma.csv");
    write_association_csv(*g, gamma);
    Output p(out, out_dir, "per_speed.csv");
    write_per_speed_csv(*p, per_speed);
  }
  return 0;
}

int cmd_simulate(const RunConfig& run, const SimFlags& flags, const std::string& out_dir,
                 const std::string& stats_path, std::ostream& out) {
  const auto sim = resolve_sim_config(run, flags);
  const auto stats = run_replications(run.network, sim);
  const auto rates = estimate_rate_matrix(stats, run.network);
  Output main(out, out_dir, "rates.csv");
  write_rate_csv(*main, rates);
  if (!out_dir.empty()) {
    Output s(out, out_dir, "stats.jsonl");
    write_stats_jsonl(*s, stats);
  }
  if (!stats_path.empty()) {
    std::ofstream s(stats_path);
    if (!s) throw std::runtime_error("cannot write " + stats_path);
    write_stats_jsonl(s, stats);
  }
  return 0;
}

int cmd_compare(const RunConfig& run, const SimFlags& flags, double tolerance,
                const std::string& out_dir, std::ostream& out) {
  const auto analytic = total_handover_rate(run.network, run.speed, run.users);
  const auto sim = resolve_sim_config(run, flags);
  const auto simulated = estimate_rate_matrix(run_replications(run.network, sim), run.network);
  Output table(out, out_dir, "compare.csv");
  *table << "m,n,analytic_hz,simulated_hz,ci_halfwidth,relative_error,within_tolerance\n";
  bool ok = true;
  for (Eigen::Index m = 0; m < analytic.pairwise.rows(); ++m) {
    for (Eigen::Index n = 0; n < analytic.pairwise.cols(); ++n) {
      const double a = analytic.pairwise(m, n);
      const double s = simulated.pairwise(m, n);
      const double half = (*simulated.ci_halfwidth)(m, n);
      const bool ci_usable = !(*simulated.ci_unreliable)(m, n) && std::isfinite(half);
      const bool covered = ci_usable && std::abs(s - a) <= half;
      const double gap = relative_gap(a, s);
      const bool within = covered || gap <= tolerance;
      ok = ok && within;
      *table << m + 1 << ',' << n + 1 << ',' << format_number(a) << ',' << format_number(s) << ','
             << format_number(half) << ',' << format_number(gap) << ',' << (within ? 1 : 0)
             << '\n';
    }
  }
  *table << "total,total," << format_number(analytic.total) << ','
         << format_number(simulated.total) << ','
         << format_number(simulated.total_ci_halfwidth.value_or(std::nan(""))) << ','
         << format_number(relative_gap(analytic.total, simulated.total)) << ",\n";
  return ok ? 0 : 1;
}

int cmd_sweep(const RunConfig& run, const SimFlags& flags, const std::string& param,
              const std::vector<double>& values, bool simulate, const std::string& out_dir,
              std::ostream& out) {
  Output table(out, out_dir, "sweep.csv");
  *table << "param,value,m,n,provenance,rate_hz,ci_halfwidth\n";
  // Validate every point before spending time on any of them.
  std::vector<RunConfig> points;
  for (double v : values) points.push_back(apply_parameter(run, param, v));
  for (std::size_t i = 0; i < points.size(); ++i) {
    std::vector<RateMatrix> results{total_handover_rate(points[i].network, points[i].speed,
                                                        points[i].users)};
    if (simulate) {
      const auto sim = resolve_sim_config(points[i], flags);
      results.push_back(
          estimate_rate_matrix(run_replications(points[i].network, sim), points[i].network));
    }
    for (const auto& r : results) {
      const std::string prov = r.provenance == Provenance::analytic ? "analytic" : "simulated";
      const auto prefix = param + "," + format_number(values[i]) + ",";
      for (Eigen::Index m = 0; m < r.pairwise.rows(); ++m)
        for (Eigen::Index n = 0; n < r.pairwise.cols(); ++n)
          *table << prefix << m + 1 << ',' << n + 1 << ',' << prov << ','
                 << format_number(r.pairwise(m, n)) << ','
                 << (r.ci_halfwidth ? format_number((*r.ci_halfwidth)(m, n)) : "") << '\n';
      *table << prefix << "total,total," << prov << ',' << format_number(r.total) << ','
             << (r.total_ci_halfwidth ? format_number(*r.total_ci_halfwidth) : "") << '\n';
    }
  }
  return 0;
}

struct OracleFlags {
  int m = 1;
  int n = 2;
  double serving_distance = 300.0;
  double angle = 2.0;
  double displacement = 5.0;
  int points = 180;
};

int cmd_oracle(const RunConfig& run, const OracleFlags& f, const std::string& out_dir,
               std::ostream& out) {
  const auto tiers = static_cast<int>(run.network.tier_count());
  if (f.m < 1 || f.m > tiers || f.n < 1 || f.n > tiers)
    throw ConfigError("oracle tiers must be between 1 and " + std::to_string(tiers));
  if (!(f.serving_distance > 0.0) || !(f.displacement > 0.0) || f.points < 4)
    throw ConfigError("oracle needs --R > 0, --r > 0 and --points >= 4");
  const ServingGeometry g{f.serving_distance, f.angle, f.displacement,
                          static_cast<TierIndex>(f.m - 1), static_cast<TierIndex>(f.n - 1)};
  Output table(out, out_dir, "boundary.csv");
  *table << "curve,x_m,y_m\n";
  for (const auto& p : bad_region_boundary(g, run.network, f.points))
    *table << p.curve << ',' << format_number(p.x) << ',' << format_number(p.y) << '\n';
  return 0;
}

}  // namespace

SimConfig simulation_profile(const std::string& name) {
  SimConfig sim;
  sim.replications = 8;
  if (name == "desk") {
    sim.disk_radius = 5000.0;
    sim.duration = 2000.0;
    sim.count_radius = 3000.0;
  } else if (name == "paper") {
    sim.disk_radius = 10000.0;
    sim.duration = 1e4;
    sim.count_radius = 0.0;
  } else {
    throw ConfigError("unknown profile '" + name + "'");
  }
  return sim;
}

SimConfig resolve_sim_config(const RunConfig& run, const SimFlags& flags) {
  SimConfig sim = simulation_profile(flags.profile);
  if (flags.seed) sim.base_seed = *flags.seed;
  if (flags.replications) sim.replications = *flags.replications;
  if (flags.duration) sim.duration = *flags.duration;
  if (flags.time_step) {
    if (!(*flags.time_step > 0.0)) throw ConfigError("time step must be positive");
    sim.time_step = *flags.time_step;
  }
  if (flags.count_radius) sim.count_radius = *flags.count_radius;
  if (flags.disk_radius) sim.disk_radius = *flags.disk_radius;
  if (flags.residence_horizon) sim.residence_horizon = *flags.residence_horizon;
  if (flags.model == "rwp") sim.mobility.model = WalkingModel::rwp;
  else if (flags.model == "straight") sim.mobility.model = WalkingModel::straight_line;
  else throw ConfigError("unknown walking model '" + flags.model + "'");
  sim.mobility.redraw_speed_on_turn = !flags.keep_speed;
  sim.mobility.speed = run.speed;
  if (!run.users.is_uniform())
    throw ConfigError("the simulator places UEs at one uniform density");
  validate_sim_config(sim);
  resolved_time_step(run.network, sim);
  resolved_count_radius(run.network, sim);
  return sim;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Handover rates of multi-tier cellular networks: analytic model and simulator"};
  app.name("hetho");
  app.require_subcommand(1);

  std::string config_path, out_dir, stats_path, param;
  bool dump = false, simulate_rows = false;
  SimFlags sim_flags;
  double tolerance = 0.03;
  std::vector<double> values;
  int figure_id = 0;
  OracleFlags oracle;

  auto common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", config_path, "JSON config")->required();
    sub->add_option("-o,--out", out_dir, "output directory (default: stdout)");
    sub->add_flag("--dump-config", dump, "print the normalised config and exit");
  };
  auto* analytic = app.add_subcommand("analytic", "analytic rate matrix, gamma and per-speed rates");
  common(analytic);
  auto* simulate = app.add_subcommand("simulate", "Monte-Carlo rate matrix");
  common(simulate);
  add_sim_flags(simulate, sim_flags);
  simulate->add_option("--stats", stats_path, "write per-replication JSON lines here");
  auto* compare = app.add_subcommand("compare", "analytic vs simulated, exit 1 on disagreement");
  common(compare);
  add_sim_flags(compare, sim_flags);
  compare->add_option("--tolerance", tolerance, "relative tolerance")->check(CLI::NonNegativeNumber);
  auto* sweep = app.add_subcommand("sweep", "rates over one parameter");
  common(sweep);
  add_sim_flags(sweep, sim_flags);
  sweep->add_option("--param", param, "tiers[i].density|power|alpha|bias, speed.mean, user_density")
      ->required();
  sweep->add_option("--values", values, "comma-separated values")->required()->delimiter(',');
  sweep->add_flag("--simulate", simulate_rows, "add simulated rows");
  auto* figure = app.add_subcommand("figure", "dataset behind a figure (ids 4 to 9)");
  common(figure);
  add_sim_flags(figure, sim_flags);
  figure->add_option("id", figure_id, "figure id")->required();
  figure->add_flag("--simulate", simulate_rows, "add simulated rows to figures 4 to 6");
  auto* oracle_cmd = app.add_subcommand("oracle", "bad-region boundary for one geometry");
  common(oracle_cmd);
  oracle_cmd->add_option("--m", oracle.m, "serving tier (1-based)");
  oracle_cmd->add_option("--n", oracle.n, "candidate tier (1-based)");
  oracle_cmd->add_option("--R", oracle.serving_distance, "serving distance in metres");
  oracle_cmd->add_option("--theta", oracle.angle, "serving angle in radians");
  oracle_cmd->add_option("--r", oracle.displacement, "UE displacement in metres");
  oracle_cmd->add_option("--points", oracle.points, "points per arc");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    report_error(err, "usage", e.what());
    return 2;
  }

  try {
    const RunConfig run = load_run_config(config_path);
    if (dump) {
      out << to_json(run).dump(2) << '\n';
      return 0;
    }
    if (analytic->parsed()) return cmd_analytic(run, out_dir, out);
    if (simulate->parsed()) return cmd_simulate(run, sim_flags, out_dir, stats_path, out);
    if (compare->parsed()) return cmd_compare(run, sim_flags, tolerance, out_dir, out);
    if (sweep->parsed()) return cmd_sweep(run, sim_flags, param, values, simulate_rows, out_dir, out);
    if (figure->parsed()) {
      const auto sim = resolve_sim_config(run, sim_flags);
      Output table(out, out_dir, "figure" + std::to_string(figure_id) + ".csv");
      write_figure(figure_id, run, sim, simulate_rows, *table);
      return 0;
    }
    if (oracle_cmd->parsed()) {
      if (oracle_cmd->count("--n") == 0 && run.network.tier_count() == 1) oracle.n = 1;
      return cmd_oracle(run, oracle, out_dir, out);
    }
  } catch (const ConfigError& e) {
    report_error(err, "config", e.what());
    return 2;
  } catch (const QuadratureError& e) {
    report_error(err, "quadrature", e.what());
    return 1;
  } catch (const std::exception& e) {
    report_error(err, "runtime", e.what());
    return 1;
  }
  return 2;
}

}  // namespace hetho
