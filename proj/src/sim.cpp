#include "hetho/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <numbers>
#include <random>
#include <thread>

#include "hetho/config_io.hpp"
#include "hetho/stats.hpp"

namespace hetho {

namespace {

constexpr double kPi = std::numbers::pi;

double squared_distance(double ax, double ay, double bx, double by) {
  const double dx = ax - bx, dy = ay - by;
  return dx * dx + dy * dy;
}

// Picks the winner among per-tier nearest stations visited in tier order.
struct Chooser {
  explicit Chooser(const AssociationCost& c) : cost(c) {}
  const AssociationCost& cost;
  bool have = false;
  double best_cost = 0.0;
  BsRef best;

  void offer(std::size_t tier, std::size_t index, double d2) {
    const double c = cost(tier, d2);
    if (!have || c < best_cost) {
      have = true;
      best_cost = c;
      best = {tier, index};
    }
  }
};

}  // namespace

AssociationCost::AssociationCost(const NetworkConfig& cfg) : equal_(cfg.equal_exponents()) {
  for (const auto& t : cfg.tiers) {
    if (equal_) {
      scale_.push_back(std::pow(t.biased_power(), -2.0 / t.pathloss_exponent));
    } else {
      scale_.push_back(0.5 * t.pathloss_exponent);
      offset_.push_back(std::log(t.biased_power()));
    }
  }
}

std::size_t BsField::station_count() const {
  std::size_t n = 0;
  for (const auto& tier : points) n += tier.size();
  return n;
}

std::vector<Point> sample_ppp(double density, double disk_radius, Philox4x32& rng) {
  if (!(density >= 0.0)) throw std::domain_error("density must be non-negative");
  std::vector<Point> out;
  const double mean = density * kPi * disk_radius * disk_radius;
  if (mean == 0.0) return out;
  std::poisson_distribution<long> count(mean);
  const long n = count(rng);
  out.reserve(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) {
    const double r = disk_radius * std::sqrt(rng.uniform());
    const double a = 2.0 * kPi * rng.uniform();
    out.emplace_back(r * std::cos(a), r * std::sin(a));
  }
  return out;
}

BsField sample_field(const NetworkConfig& cfg, double disk_radius, std::uint64_t seed,
                     std::uint32_t replication) {
  BsField field;
  field.config = cfg;
  field.radius = disk_radius;
  for (TierIndex n = 0; n < cfg.tier_count(); ++n) {
    auto rng = make_stream(seed, StreamKind::field, replication, static_cast<std::uint32_t>(n));
    field.points.push_back(sample_ppp(cfg.tier(n).density, disk_radius, rng));
  }
  return field;
}

BsRef strongest_bs(const BsField& field, const Point& position) {
  const AssociationCost cost(field.config);
  Chooser choose(cost);
  for (std::size_t t = 0; t < field.points.size(); ++t) {
    const auto& pts = field.points[t];
    if (pts.empty()) continue;
    std::size_t nearest = 0;
    double d2 = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const double e = squared_distance(position.x(), position.y(), pts[i].x(), pts[i].y());
      if (e < d2) {
        d2 = e;
        nearest = i;
      }
    }
    choose.offer(t, nearest, d2);
  }
  if (!choose.have) throw std::invalid_argument("strongest_bs: field has no stations");
  return choose.best;
}

AssociationIndex::AssociationIndex(const BsField& field, double extent, double cell_size)
    : field_(&field), cost_(field.config) {
  if (!(extent > 0.0) || !(cell_size > 0.0))
    throw std::invalid_argument("association index needs positive extent and cell size");
  if (field.station_count() == 0) throw std::invalid_argument("association index: empty field");
  cells_per_side_ = static_cast<long>(std::ceil(2.0 * extent / cell_size));
  cell_ = cell_size;
  origin_ = -0.5 * static_cast<double>(cells_per_side_) * cell_size;

  const AssociationCost& cost = cost_;
  std::vector<Candidate> all;
  for (std::size_t t = 0; t < field.points.size(); ++t)
    for (std::size_t i = 0; i < field.points[t].size(); ++i)
      all.push_back({field.points[t][i].x(), field.points[t][i].y(), static_cast<std::uint32_t>(t),
                     static_cast<std::uint32_t>(i)});

  // Stations bucketed on a coarse grid; each cell scans rings of buckets
  // outwards until nothing further away can beat the best worst case.
  const double bucket = std::max(cell_size, 1.0 / std::sqrt(field.config.total_density()));
  const double reach = std::max(extent, field.radius) + bucket;
  const long buckets_per_side = static_cast<long>(std::ceil(2.0 * reach / bucket));
  const double bucket_origin = -0.5 * static_cast<double>(buckets_per_side) * bucket;
  auto bucket_of = [&](double v) {
    return std::clamp(static_cast<long>(std::floor((v - bucket_origin) / bucket)), 0L,
                      buckets_per_side - 1);
  };
  std::vector<std::vector<std::uint32_t>> buckets(
      static_cast<std::size_t>(buckets_per_side * buckets_per_side));
  for (std::size_t j = 0; j < all.size(); ++j)
    buckets[static_cast<std::size_t>(bucket_of(all[j].y) * buckets_per_side + bucket_of(all[j].x))]
        .push_back(static_cast<std::uint32_t>(j));
  const std::size_t tier_count = field.points.size();

  const double half_diagonal = 0.5 * std::sqrt(2.0) * cell_size * (1.0 + 1e-9);
  std::vector<std::pair<std::uint32_t, double>> seen;
  std::vector<std::uint32_t> kept;
  offsets_.reserve(static_cast<std::size_t>(cells_per_side_ * cells_per_side_) + 1);
  offsets_.push_back(0);
  for (long iy = 0; iy < cells_per_side_; ++iy) {
    for (long ix = 0; ix < cells_per_side_; ++ix) {
      const double cx = origin_ + (static_cast<double>(ix) + 0.5) * cell_size;
      const double cy = origin_ + (static_cast<double>(iy) + 0.5) * cell_size;
      const long bx = bucket_of(cx), by = bucket_of(cy);
      double best_high = std::numeric_limits<double>::infinity();
      seen.clear();
      auto visit = [&](long gx, long gy) {
        if (gx < 0 || gy < 0 || gx >= buckets_per_side || gy >= buckets_per_side) return;
        for (const auto j : buckets[static_cast<std::size_t>(gy * buckets_per_side + gx)]) {
          const double d = std::sqrt(squared_distance(cx, cy, all[j].x, all[j].y));
          const double near = std::max(0.0, d - half_diagonal);
          const double far = d + half_diagonal;
          seen.emplace_back(j, near > 0.0 ? cost(all[j].tier, near * near)
                                          : -std::numeric_limits<double>::infinity());
          best_high = std::min(best_high, cost(all[j].tier, far * far));
        }
      };
      for (long ring = 0; ring <= buckets_per_side; ++ring) {
        if (ring == 0) {
          visit(bx, by);
        } else {
          for (long k = -ring; k <= ring; ++k) {
            visit(bx + k, by - ring);
            visit(bx + k, by + ring);
          }
          for (long k = -ring + 1; k <= ring - 1; ++k) {
            visit(bx - ring, by + k);
            visit(bx + ring, by + k);
          }
        }
        if (!std::isfinite(best_high)) continue;
        // Unvisited stations are at least ring * bucket away from the centre.
        const double gap = static_cast<double>(ring) * bucket - half_diagonal;
        if (gap <= 0.0) continue;
        bool done = true;
        const double cutoff = best_high + 1e-9 * std::abs(best_high);
        for (std::size_t t = 0; t < tier_count && done; ++t)
          done = cost(t, gap * gap) > cutoff;
        if (done) break;
      }
      const double cutoff = best_high + 1e-9 * std::abs(best_high);
      kept.clear();
      for (const auto& [j, low] : seen)
        if (low <= cutoff) kept.push_back(j);
      std::sort(kept.begin(), kept.end());  // all[] is in (tier, index) order
      for (const auto j : kept) candidates_.push_back(all[j]);
      offsets_.push_back(static_cast<std::uint32_t>(candidates_.size()));
    }
  }
}

BsRef AssociationIndex::strongest(const Point& position) const {
  const double fx = std::floor((position.x() - origin_) / cell_);
  const double fy = std::floor((position.y() - origin_) / cell_);
  const auto side = static_cast<double>(cells_per_side_);
  if (!(fx >= 0.0 && fy >= 0.0 && fx < side && fy < side)) return strongest_bs(*field_, position);
  const auto cell = static_cast<std::size_t>(fy * side + fx);
  Chooser choose(cost_);
  // Candidates are stored in (tier, index) order; track the nearest per tier.
  std::uint32_t tier = std::numeric_limits<std::uint32_t>::max();
  std::uint32_t nearest = 0;
  double d2 = 0.0;
  for (auto k = offsets_[cell]; k < offsets_[cell + 1]; ++k) {
    const auto& c = candidates_[k];
    const double e = squared_distance(position.x(), position.y(), c.x, c.y);
    if (c.tier != tier) {
      if (tier != std::numeric_limits<std::uint32_t>::max()) choose.offer(tier, nearest, d2);
      tier = c.tier;
      nearest = c.index;
      d2 = e;
    } else if (e < d2) {
      nearest = c.index;
      d2 = e;
    }
  }
  if (tier != std::numeric_limits<std::uint32_t>::max()) choose.offer(tier, nearest, d2);
  return choose.best;
}

double AssociationIndex::mean_candidates() const {
  return static_cast<double>(candidates_.size()) / static_cast<double>(offsets_.size() - 1);
}

void UeState::set_heading(double radians) {
  heading = radians;
  direction = Point(std::cos(radians), std::sin(radians));
}

UeState step_ue(UeState state, const MobilityParams& mobility, double time_step,
                Philox4x32& rng) {
  state.position += (state.speed * time_step) * state.direction;
  if (mobility.model == WalkingModel::rwp) {
    state.hold_remaining -= time_step;
    while (state.hold_remaining <= 0.0) {
      state.set_heading(2.0 * kPi * rng.uniform());
      state.hold_remaining += mobility.hold_max * rng.uniform();
      if (mobility.redraw_speed_on_turn) state.speed = mobility.speed.sample(rng.uniform());
    }
  }
  return state;
}

void reflect_in_disk(UeState& state, const Point& from, double radius) {
  Point start = from;
  for (int bounce = 0; bounce < 8 && state.position.squaredNorm() > radius * radius; ++bounce) {
    // Solve |start + s (to - start)| = radius for s in (0, 1].
    const Point delta = state.position - start;
    const double a = delta.squaredNorm();
    const double b = 2.0 * start.dot(delta);
    const double c = start.squaredNorm() - radius * radius;
    const double s = std::clamp((-b + std::sqrt(std::max(0.0, b * b - 4.0 * a * c))) / (2.0 * a),
                                0.0, 1.0);
    const Point hit = start + s * delta;
    const Point normal = hit.normalized();
    const Point rest = state.position - hit;
    state.position = hit + rest - 2.0 * rest.dot(normal) * normal;
    const Point turned = state.direction - 2.0 * state.direction.dot(normal) * normal;
    state.set_heading(std::atan2(turned.y(), turned.x()));
    start = hit * (1.0 - 1e-15);
  }
  if (state.position.squaredNorm() > radius * radius)
    state.position *= radius * (1.0 - 1e-12) / state.position.norm();
}

void validate_sim_config(const SimConfig& sim) {
  if (!(sim.duration > 0.0) || !std::isfinite(sim.duration))
    throw ConfigError("duration must be positive");
  if (!(sim.disk_radius > 0.0)) throw ConfigError("disk radius must be positive");
  if (!(sim.motion_fraction > 0.0 && sim.motion_fraction <= 1.0))
    throw ConfigError("motion fraction must be in (0, 1]");
  if (!(sim.count_radius >= 0.0)) throw ConfigError("count radius must be non-negative");
  if (!(sim.time_step >= 0.0)) throw ConfigError("time step must be positive");
  if (sim.replications < 1) throw ConfigError("replications must be at least 1");
  if (!(sim.mobility.hold_max > 0.0)) throw ConfigError("RWP hold maximum must be positive");
  if (!(sim.residence_horizon >= 0.0) || sim.residence_horizon >= sim.duration)
    throw ConfigError("residence horizon must be in [0, duration)");
  validate_speed_model(sim.mobility.speed);
  if (!sim.mobility.speed.per_tier.empty())
    throw ConfigError("the simulator takes a single speed law for all UEs");
}

double default_time_step(const NetworkConfig& cfg, const SimConfig& sim) {
  const double mean_speed = sim.mobility.speed.mean();
  const double raw =
      mean_speed > 0.0 ? 0.002 / (2.0 * mean_speed * std::sqrt(cfg.total_density())) : 1.0;
  const double steps = std::ceil(sim.duration / raw - 1e-9);
  return sim.duration / std::max(1.0, steps);
}

double resolved_time_step(const NetworkConfig& cfg, const SimConfig& sim) {
  validate_sim_config(sim);
  if (sim.time_step == 0.0) return default_time_step(cfg, sim);
  const double steps = sim.duration / sim.time_step;
  if (std::abs(steps - std::round(steps)) > 1e-9 * steps || std::round(steps) < 1.0)
    throw ConfigError("duration must be a multiple of time_step");
  return sim.time_step;
}

double resolved_count_radius(const NetworkConfig& cfg, const SimConfig& sim) {
  const double r = sim.count_radius > 0.0 ? sim.count_radius : std::sqrt(cfg.region_area / kPi);
  if (r > sim.motion_fraction * sim.disk_radius)
    throw ConfigError("count region must lie inside the motion boundary");
  return r;
}

HandoverStats run_replication(const NetworkConfig& cfg, const SimConfig& sim,
                              std::uint32_t replication) {
  const double dt = resolved_time_step(cfg, sim);
  const auto steps = static_cast<long long>(std::llround(sim.duration / dt));
  const double count_radius = resolved_count_radius(cfg, sim);
  const double count_r2 = count_radius * count_radius;
  const double motion_radius = sim.motion_fraction * sim.disk_radius;
  const double horizon = sim.residence_horizon > 0.0 ? sim.residence_horizon : 0.5 * sim.duration;
  const double last_arrival = sim.duration - horizon;

  const auto tiers = static_cast<Eigen::Index>(cfg.tier_count());
  HandoverStats out;
  out.counts = decltype(out.counts)::Zero(tiers, tiers);
  out.residence.resize(cfg.tier_count());
  out.seed = sim.base_seed;
  out.replication = replication;
  out.config_hash = config_hash(cfg, sim);
  out.time_step = dt;

  const BsField field = sample_field(cfg, sim.disk_radius, sim.base_seed, replication);
  out.station_count = field.station_count();

  auto population = make_stream(sim.base_seed, StreamKind::population, replication, 0);
  const double mean_ues = cfg.user_density * kPi * motion_radius * motion_radius;
  const long ue_count = mean_ues > 0.0 ? std::poisson_distribution<long>(mean_ues)(population) : 0;
  out.ue_count = static_cast<std::size_t>(ue_count);

  std::optional<AssociationIndex> index;
  if (out.station_count > 0)
    index.emplace(field, motion_radius, 0.05 / std::sqrt(cfg.total_density()));

  const bool rwp = sim.mobility.model == WalkingModel::rwp;
  for (long i = 0; i < ue_count; ++i) {
    auto rng = make_stream(sim.base_seed, StreamKind::ue, replication, static_cast<std::uint32_t>(i));
    UeState ue;
    const double r = motion_radius * std::sqrt(rng.uniform());
    const double a = 2.0 * kPi * rng.uniform();
    ue.position = Point(r * std::cos(a), r * std::sin(a));
    ue.speed = sim.mobility.speed.sample(rng.uniform());
    ue.set_heading(2.0 * kPi * rng.uniform());
    ue.hold_remaining = rwp ? sim.mobility.hold_max * rng.uniform() : 0.0;
    if (index) ue.serving = index->strongest(ue.position);

    double arrival = -1.0;  // time of the last observed change, < 0 before the first
    bool arrival_counted = false;
    double inside_time = 0.0;
    for (long long k = 0; k < steps; ++k) {
      const Point from = ue.position;
      ue = step_ue(std::move(ue), sim.mobility, dt, rng);
      if (ue.position.squaredNorm() > motion_radius * motion_radius)
        reflect_in_disk(ue, from, motion_radius);
      const bool inside = ue.position.squaredNorm() <= count_r2;
      if (inside) inside_time += dt;
      if (!index) continue;
      const BsRef now = index->strongest(ue.position);
      if (now == ue.serving) continue;
      const double t = static_cast<double>(k + 1) * dt;
      if (inside) ++out.counts(static_cast<Eigen::Index>(ue.serving.tier),
                               static_cast<Eigen::Index>(now.tier));
      if (arrival_counted) out.residence[ue.serving.tier].push_back(t - arrival);
      arrival = t;
      arrival_counted = inside && t <= last_arrival;
      ue.serving = now;
    }
    out.ue_time_in_region += inside_time;
  }
  return out;
}

unsigned worker_threads(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("HETHO_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<HandoverStats> run_replications(const NetworkConfig& cfg, const SimConfig& sim,
                                            unsigned threads) {
  validate_sim_config(sim);
  const auto total = static_cast<std::size_t>(sim.replications);
  std::vector<HandoverStats> results(total);
  const unsigned workers = std::min<unsigned>(worker_threads(threads), static_cast<unsigned>(total));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_lock;
  auto work = [&] {
    for (std::size_t r = next++; r < total; r = next++) {
      try {
        results[r] = run_replication(cfg, sim, static_cast<std::uint32_t>(r));
      } catch (...) {
        std::lock_guard lock(failure_lock);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);
  return results;
}

RateMatrix estimate_rate_matrix(const std::vector<HandoverStats>& stats, const NetworkConfig& cfg) {
  const auto tiers = static_cast<Eigen::Index>(cfg.tier_count());
  const double ues_in_region = cfg.user_density * cfg.region_area;
  Eigen::MatrixXd events = Eigen::MatrixXd::Zero(tiers, tiers);
  double ue_time = 0.0;
  std::vector<Eigen::MatrixXd> per_rep;
  std::vector<double> per_rep_total;
  for (const auto& s : stats) {
    if (s.counts.rows() != tiers || s.counts.cols() != tiers)
      throw std::invalid_argument("handover stats do not match the tier count");
    const Eigen::MatrixXd c = s.counts.cast<double>();
    events += c;
    ue_time += s.ue_time_in_region;
    const Eigen::MatrixXd rates =
        s.ue_time_in_region > 0.0 ? Eigen::MatrixXd(c / s.ue_time_in_region * ues_in_region)
                                  : Eigen::MatrixXd::Zero(tiers, tiers);
    per_rep.push_back(rates);
    per_rep_total.push_back(compensated_total(rates));
  }

  Eigen::MatrixXd pooled = Eigen::MatrixXd::Zero(tiers, tiers);
  if (ue_time > 0.0) pooled = events / ue_time * ues_in_region;
  RateMatrix out = RateMatrix::from_pairwise(pooled, Provenance::simulated);

  const double nan = std::numeric_limits<double>::quiet_NaN();
  const auto k = per_rep.size();
  Eigen::MatrixXd half = Eigen::MatrixXd::Constant(tiers, tiers, nan);
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> unreliable(tiers, tiers);
  for (Eigen::Index m = 0; m < tiers; ++m) {
    for (Eigen::Index n = 0; n < tiers; ++n) {
      if (k >= 2) {
        std::vector<double> xs;
        for (const auto& r : per_rep) xs.push_back(r(m, n));
        half(m, n) = ci95_factor(k) * summarize(xs).std_dev / std::sqrt(static_cast<double>(k));
      }
      unreliable(m, n) = k < 2 || events(m, n) == 0.0;
    }
  }
  out.ci_halfwidth = half;
  out.total_ci_halfwidth =
      k >= 2 ? ci95_factor(k) * summarize(per_rep_total).std_dev / std::sqrt(static_cast<double>(k))
             : nan;
  out.events = events;
  out.ci_unreliable = unreliable;
  out.sim_time = ue_time;
  return out;
}

std::uint64_t config_hash(const NetworkConfig& cfg, const SimConfig& sim) {
  const RunConfig run{cfg, sim.mobility.speed, UserDensityModel::from_config(cfg)};
  const nlohmann::json j = {{"network", to_json(run)}, {"sim", to_json(sim)}};
  std::uint64_t h = 14695981039346656037ull;
  for (const unsigned char c : j.dump()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace hetho
