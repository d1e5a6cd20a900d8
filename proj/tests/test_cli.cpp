#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "hetho/cli.hpp"
#include "hetho/report.hpp"

using namespace hetho;
namespace fs = std::filesystem;

namespace {

const std::string kTwoTier = std::string(HETHO_SOURCE_DIR) + "/configs/two_tier.json";

struct Run {
  int code = 0;
  std::string out, err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  Run r;
  r.code = run_cli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

// Without --out, analytic prints its tables one after another, separated by
// blank lines.
std::string first_block(const std::string& text) { return text.substr(0, text.find("\n\n") + 1); }

std::string first_line(const std::string& text) { return text.substr(0, text.find('\n')); }

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("hetho_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string write_file(const fs::path& path, const std::string& text) {
  std::ofstream(path) << text;
  return path.string();
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Small and fast simulation settings.
const std::vector<std::string> kQuick = {"--duration", "100", "--disk-radius", "1500",
                                         "--count-radius", "1000"};

std::vector<std::string> with_quick(std::vector<std::string> args) {
  args.insert(args.end(), kQuick.begin(), kQuick.end());
  return args;
}

}  // namespace

TEST_CASE("analytic output for the two-tier config") {
  const auto r = cli({"analytic", "-c", kTwoTier});
  REQUIRE(r.code == 0);
  const auto rows = parse_csv(first_block(r.out));
  REQUIRE(rows.size() == 6);
  CHECK(r.out.find("\nm,gamma\n") != std::string::npos);
  CHECK(r.out.find("\nm,n,rate_per_speed_per_m\n") != std::string::npos);
  CHECK(first_line(r.out) == kRateCsvHeader);
  CHECK(rows[1][0] == "1");
  CHECK(rows[1][1] == "1");
  CHECK(rows[5][0] == "total");
  double sum = 0.0;
  for (int i = 1; i <= 4; ++i) sum += std::stod(rows[i][2]);
  CHECK(std::stod(rows[5][2]) == doctest::Approx(sum).epsilon(1e-14));
  CHECK(std::stod(rows[5][2]) == doctest::Approx(1.1079834144371048).epsilon(1e-10));
}

TEST_CASE("analytic output files and headers") {
  const auto dir = scratch("files");
  REQUIRE(cli({"analytic", "-c", kTwoTier, "-o", dir.string()}).code == 0);
  CHECK(first_line(slurp(dir / "rates.csv")) == "m,n,rate_hz,ci_halfwidth,events,sim_time_s");
  CHECK(first_line(slurp(dir / "gamma.csv")) == "m,gamma");
  CHECK(first_line(slurp(dir / "per_speed.csv")) == "m,n,rate_per_speed_per_m");
  const auto gamma = parse_csv(slurp(dir / "gamma.csv"));
  REQUIRE(gamma.size() == 3);
  CHECK(std::stod(gamma[1][1]) + std::stod(gamma[2][1]) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("a single tier reproduces the closed form") {
  const auto dir = scratch("single");
  const auto path = write_file(dir / "one.json", R"({
    "tiers": [{"density_per_km2": 3.0, "power": 1.0, "alpha": 4.0, "bias": 1.0}],
    "user_density_per_km2": 50.0,
    "region_area_km2": 2.0,
    "speed": {"kind": "constant", "mean_mps": 7.0}
  })");
  const auto r = cli({"analytic", "-c", path});
  REQUIRE(r.code == 0);
  const auto rows = parse_csv(first_block(r.out));
  REQUIRE(rows.size() == 3);
  const double expected = 4.0 * std::sqrt(3e-6) / M_PI * 50e-6 * 2e6 * 7.0;
  CHECK(std::stod(rows[1][2]) == doctest::Approx(expected).epsilon(1e-6));
}

TEST_CASE("config errors exit 2 with a JSON error") {
  const auto dir = scratch("errors");
  const auto bad = write_file(dir / "bad.json", "{\"tiers\": [");
  auto r = cli({"analytic", "-c", bad});
  CHECK(r.code == 2);
  const auto err = nlohmann::json::parse(r.err);
  CHECK(err["error"] == "config");
  CHECK(err["message"].get<std::string>().find("malformed JSON") != std::string::npos);

  r = cli({"analytic", "-c", (dir / "missing.json").string()});
  CHECK(r.code == 2);

  const auto negative = write_file(dir / "neg.json", R"({
    "tiers": [{"density_per_km2": -1.0, "power": 1.0, "alpha": 4.0, "bias": 1.0}],
    "user_density_per_km2": 50.0})");
  CHECK(cli({"analytic", "-c", negative}).code == 2);

  r = cli({"simulate", "-c", kTwoTier, "--duration", "0"});
  CHECK(r.code == 2);
  CHECK(r.err.find("duration must be positive") != std::string::npos);

  CHECK(cli({"simulate", "-c", kTwoTier, "--model", "teleport"}).code == 2);
  CHECK(cli({"bogus"}).code == 2);
  CHECK(cli({}).code == 2);
  CHECK(cli({"analytic"}).code == 2);
  CHECK(cli({"--help"}).code == 0);
}

TEST_CASE("the installed tool reports errors through its exit status") {
  const auto dir = scratch("process");
  const auto bad = write_file(dir / "bad.json", "not json");
  const std::string cmd = std::string("\"") + HETHO_CLI_PATH + "\" analytic -c \"" + bad + "\" 2>\"" +
                          (dir / "err.txt").string() + "\"";
  const int status = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(status));
  CHECK(WEXITSTATUS(status) == 2);
  CHECK(nlohmann::json::parse(slurp(dir / "err.txt"))["error"] == "config");

  const std::string ok = std::string("\"") + HETHO_CLI_PATH + "\" analytic -c \"" + kTwoTier +
                         "\" >\"" + (dir / "out.csv").string() + "\"";
  const int ok_status = std::system(ok.c_str());
  REQUIRE(WIFEXITED(ok_status));
  CHECK(WEXITSTATUS(ok_status) == 0);
  CHECK(first_line(slurp(dir / "out.csv")) == kRateCsvHeader);
}

TEST_CASE("simulate is deterministic for a fixed seed") {
  const auto args = with_quick({"simulate", "-c", kTwoTier, "--replications", "2", "--seed", "7"});
  const auto a = cli(args), b = cli(args);
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(first_line(a.out) == kRateCsvHeader);
  const auto rows = parse_csv(a.out);
  REQUIRE(rows.size() == 6);
  CHECK_FALSE(rows[1][3].empty());
  CHECK(std::stod(rows[5][4]) > 0.0);

  auto other = args;
  other[6] = "8";
  CHECK(cli(other).out != a.out);

  const auto dir = scratch("stats");
  const auto stats = (dir / "stats.jsonl").string();
  auto with_stats = args;
  with_stats.insert(with_stats.end(), {"--stats", stats});
  REQUIRE(cli(with_stats).code == 0);
  std::ifstream in(stats);
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    CHECK(j["replication"] == lines);
    CHECK(j.contains("config_hash"));
    CHECK(j["counts"].size() == 2);
    ++lines;
  }
  CHECK(lines == 2);
}

TEST_CASE("simulate writes files under --out") {
  const auto dir = scratch("simout");
  REQUIRE(cli(with_quick({"simulate", "-c", kTwoTier, "--replications", "2", "--model", "rwp",
                          "-o", dir.string()}))
              .code == 0);
  CHECK(first_line(slurp(dir / "rates.csv")) == kRateCsvHeader);
  CHECK(fs::exists(dir / "stats.jsonl"));
}

TEST_CASE("compare") {
  const auto dir = scratch("compare");
  SUBCASE("an impossible tolerance fails without a usable interval") {
    const auto r = cli(with_quick({"compare", "-c", kTwoTier, "--replications", "1", "--tolerance",
                                   "1e-6"}));
    CHECK(r.code == 1);
    CHECK(first_line(r.out) ==
          "m,n,analytic_hz,simulated_hz,ci_halfwidth,relative_error,within_tolerance");
  }
  SUBCASE("a degenerate config gives zero on both sides") {
    const auto path = write_file(dir / "still.json", R"({
      "tiers": [{"density_per_km2": 0.3, "power": 1.0, "alpha": 4.0, "bias": 1.0}],
      "user_density_per_km2": 20.0,
      "speed": {"kind": "constant", "mean_mps": 0.0}
    })");
    const auto r = cli(with_quick({"compare", "-c", path, "--replications", "2"}));
    CHECK(r.code == 0);
    const auto rows = parse_csv(r.out);
    REQUIRE(rows.size() == 3);
    CHECK(std::stod(rows[1][2]) == 0.0);
    CHECK(std::stod(rows[1][3]) == 0.0);
  }
}

TEST_CASE("dump-config round trip") {
  const auto dir = scratch("dump");
  const auto r = cli({"analytic", "-c", kTwoTier, "--dump-config"});
  REQUIRE(r.code == 0);
  const auto dumped = write_file(dir / "dumped.json", r.out);
  CHECK(load_run_config(dumped) == load_run_config(kTwoTier));
  CHECK(cli({"analytic", "-c", dumped, "--dump-config"}).out == r.out);
  CHECK(cli({"analytic", "-c", dumped}).out == cli({"analytic", "-c", kTwoTier}).out);
}

TEST_CASE("figure datasets") {
  SUBCASE("figure 9 is an analytic bias sweep of 11 points") {
    const auto r = cli({"figure", "9", "-c", kTwoTier});
    REQUIRE(r.code == 0);
    CHECK(first_line(r.out) == "bias2,m,n,rate_hz");
    std::map<std::string, int> points;
    for (const auto& row : parse_csv(r.out)) points[row[0]]++;
    points.erase("bias2");
    CHECK(points.size() == 11);
    CHECK(points.begin()->first == "1");
    CHECK(points.rbegin()->first == "2");
  }
  SUBCASE("figure 4 rates are linear in the mean speed") {
    const auto r = cli({"figure", "4", "-c", kTwoTier});
    REQUIRE(r.code == 0);
    CHECK(first_line(r.out) == "v_mean_mps,m,n,provenance,rate_hz,ci_halfwidth");
    std::map<std::string, std::vector<std::pair<double, double>>> series;
    auto rows = parse_csv(r.out);
    for (std::size_t i = 1; i < rows.size(); ++i)
      series[rows[i][1] + "-" + rows[i][2]].emplace_back(std::stod(rows[i][0]), std::stod(rows[i][4]));
    CHECK(series.size() >= 3);
    for (const auto& [name, xy] : series) {
      CAPTURE(name);
      REQUIRE(xy.size() == 10);
      double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
      for (auto [x, y] : xy) {
        sx += x, sy += y, sxx += x * x, sxy += x * y, syy += y * y;
      }
      const double n = static_cast<double>(xy.size());
      const double cov = sxy - sx * sy / n;
      const double r2 = cov * cov / ((sxx - sx * sx / n) * (syy - sy * sy / n));
      CHECK(r2 > 0.999);
    }
  }
  SUBCASE("headers of the other figures") {
    const std::map<std::string, std::string> headers = {
        {"5", "v_mean_mps,lambda2_per_km2,m,n,provenance,rate_hz,ci_halfwidth"},
        {"6", "lambda2_per_km2,alpha2,m,n,provenance,rate_hz,ci_halfwidth"},
        {"7", "lambda2_per_km2,m,n,provenance,forward_hz,forward_ci,reverse_hz,reverse_ci"}};
    for (const auto& [id, header] : headers) {
      CAPTURE(id);
      const auto r = cli({"figure", id, "-c", kTwoTier, "--replications", "1", "--duration", "40",
                          "--disk-radius", "1500", "--count-radius", "1000"});
      REQUIRE(r.code == 0);
      CHECK(first_line(r.out) == header);
    }
  }
  SUBCASE("figure 8 has empirical and analytic CDF columns") {
    const auto r = cli({"figure", "8", "-c", kTwoTier, "--replications", "1", "--duration", "200",
                        "--disk-radius", "1500", "--count-radius", "1000"});
    REQUIRE(r.code == 0);
    CHECK(first_line(r.out) == "lambda2_per_km2,m,t_s,empirical_cdf,analytic_cdf,samples");
    for (const auto& row : parse_csv(r.out)) {
      if (row[0] == "lambda2_per_km2") continue;
      const double e = std::stod(row[3]), a = std::stod(row[4]);
      CHECK((e >= 0.0 && e <= 1.0));
      CHECK((a >= 0.0 && a <= 1.0));
    }
  }
  SUBCASE("unknown ids are rejected") {
    CHECK(cli({"figure", "3", "-c", kTwoTier}).code == 2);
    CHECK(cli({"figure", "10", "-c", kTwoTier}).code == 2);
  }
  SUBCASE("written to the output directory") {
    const auto dir = scratch("figure");
    REQUIRE(cli({"figure", "9", "-c", kTwoTier, "-o", dir.string()}).code == 0);
    CHECK(first_line(slurp(dir / "figure9.csv")) == "bias2,m,n,rate_hz");
  }
}

TEST_CASE("sweep") {
  const auto r = cli({"sweep", "-c", kTwoTier, "--param", "tiers[1].density", "--values", "1,2,4"});
  REQUIRE(r.code == 0);
  CHECK(first_line(r.out) == "param,value,m,n,provenance,rate_hz,ci_halfwidth");
  std::vector<double> totals;
  for (const auto& row : parse_csv(r.out))
    if (row[2] == "total") totals.push_back(std::stod(row[5]));
  REQUIRE(totals.size() == 3);
  CHECK(totals[0] == doctest::Approx(0.90256).epsilon(1e-4));
  CHECK(totals[1] == doctest::Approx(1.1079834144371048).epsilon(1e-10));
  CHECK(totals[2] == doctest::Approx(1.43198).epsilon(1e-4));

  const auto speed = cli({"sweep", "-c", kTwoTier, "--param", "speed.mean", "--values", "5,10"});
  REQUIRE(speed.code == 0);
  std::vector<double> by_speed;
  for (const auto& row : parse_csv(speed.out))
    if (row[2] == "total") by_speed.push_back(std::stod(row[5]));
  REQUIRE(by_speed.size() == 2);
  CHECK(by_speed[1] == doctest::Approx(2.0 * by_speed[0]).epsilon(1e-12));

  CHECK(cli({"sweep", "-c", kTwoTier, "--param", "tiers[7].density", "--values", "1"}).code == 2);
  CHECK(cli({"sweep", "-c", kTwoTier, "--param", "tiers[0].colour", "--values", "1"}).code == 2);
  CHECK(cli({"sweep", "-c", kTwoTier, "--param", "tiers[0].density", "--values", "-1"}).code == 2);
}

TEST_CASE("oracle boundary dump") {
  const auto r = cli({"oracle", "-c", kTwoTier, "--m", "1", "--n", "2", "--R", "100", "--theta",
                      "3.141592653589793", "--r", "1", "--points", "64"});
  REQUIRE(r.code == 0);
  CHECK(first_line(r.out) == "curve,x_m,y_m");
  int lower = 0, moved = 0;
  for (const auto& row : parse_csv(r.out)) {
    if (row[0] == "lower_bound_arc") {
      ++lower;
      CHECK(std::hypot(std::stod(row[1]), std::stod(row[2])) == doctest::Approx(63.13850355589192));
    }
    moved += row[0] == "moved_arc";
  }
  CHECK(lower > 0);
  CHECK(moved > 0);
  CHECK(cli({"oracle", "-c", kTwoTier, "--m", "3"}).code == 2);
}
