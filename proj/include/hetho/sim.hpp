#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "hetho/analytic.hpp"
#include "hetho/core.hpp"
#include "hetho/rng.hpp"

namespace hetho {

using Point = Eigen::Vector2d;

struct BsRef {
  TierIndex tier = 0;
  std::size_t index = 0;
  bool operator==(const BsRef&) const = default;
};

/// One realised deployment: per-tier PPP points on a disk centred at the origin.
struct BsField {
  NetworkConfig config;
  double radius = 0.0;
  std::vector<std::vector<Point>> points;  // points[tier][index]

  std::size_t station_count() const;
};

/// Homogeneous PPP on a disk: Poisson(density * pi * radius^2) points, uniform.
std::vector<Point> sample_ppp(double density, double disk_radius, Philox4x32& rng);

/// Draws every tier from its own stream (field, replication, tier).
BsField sample_field(const NetworkConfig& cfg, double disk_radius, std::uint64_t seed,
                     std::uint32_t replication);

/// Per-tier association cost, minimised over stations. With a common
/// exponent it is d^2 (P B)^{-2/alpha}, otherwise (alpha/2) log d^2 - log(P B).
/// Both are increasing in d^2, so each tier's nearest station is its only
/// contender.
class AssociationCost {
 public:
  explicit AssociationCost(const NetworkConfig& cfg);

  double operator()(std::size_t tier, double d2) const {
    if (equal_) return d2 * scale_[tier];
    return scale_[tier] * std::log(d2) - offset_[tier];
  }

 private:
  bool equal_;
  std::vector<double> scale_;
  std::vector<double> offset_;
};

/// Station with the largest biased received power at `position`, by scanning
/// every station. Ties go to the lowest tier, then the lowest index; a UE on
/// top of a station is served by it. Throws if the field is empty.
BsRef strongest_bs(const BsField& field, const Point& position);

/// Grid of candidate lists over a square covering a disk of `extent` radius.
/// A station is kept for a cell unless its best-case BRP anywhere in the cell
/// is below some other station's worst case, so lookups agree exactly with
/// strongest_bs, tie-breaks included.
class AssociationIndex {
 public:
  AssociationIndex(const BsField& field, double extent, double cell_size);

  BsRef strongest(const Point& position) const;
  double mean_candidates() const;

 private:
  struct Candidate {
    double x, y;
    std::uint32_t tier, index;
  };

  const BsField* field_;
  AssociationCost cost_;
  double origin_ = 0.0;
  double cell_ = 1.0;
  long cells_per_side_ = 0;
  std::vector<std::uint32_t> offsets_;
  std::vector<Candidate> candidates_;
};

enum class WalkingModel { straight_line, rwp };

struct MobilityParams {
  WalkingModel model = WalkingModel::straight_line;
  SpeedModel speed = SpeedModel::uniform(5.0);
  double hold_max = 100.0;  // RWP heading hold ~ U[0, hold_max] seconds
  bool redraw_speed_on_turn = true;
};

struct UeState {
  Point position = Point::Zero();
  double speed = 0.0;
  double heading = 0.0;
  Point direction = Point(1.0, 0.0);  // unit vector along heading
  double hold_remaining = 0.0;
  BsRef serving;

  void set_heading(double radians);
};

/// Advances the UE by speed * dt along its heading. Under RWP the hold timer
/// runs down and, on expiry, heading (and optionally speed) are redrawn.
UeState step_ue(UeState state, const MobilityParams& mobility, double time_step, Philox4x32& rng);

/// Specular reflection off the circle |p| = radius for a move that started at
/// `from` inside the disk.
void reflect_in_disk(UeState& state, const Point& from, double radius);

struct SimConfig {
  double disk_radius = 10000.0;
  /// Radius of the counting disk; 0 means sqrt(S / pi) from the network config.
  double count_radius = 0.0;
  double duration = 1e4;
  /// 0 picks the default step, see default_time_step.
  double time_step = 0.0;
  MobilityParams mobility;
  int replications = 1;
  std::uint64_t base_seed = 1;
  /// UEs reflect at this fraction of the disk radius.
  double motion_fraction = 0.9;
  /// Residence intervals are recorded only if they start before
  /// duration - horizon; 0 means duration / 2.
  double residence_horizon = 0.0;
};

/// Step size that keeps the largest per-step displacement (2 v_mean dt) at
/// 0.2% of 1/sqrt(lambda_total), rounded down to divide the duration.
double default_time_step(const NetworkConfig& cfg, const SimConfig& sim);
double resolved_time_step(const NetworkConfig& cfg, const SimConfig& sim);
double resolved_count_radius(const NetworkConfig& cfg, const SimConfig& sim);
void validate_sim_config(const SimConfig& sim);

struct HandoverStats {
  Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> counts;
  double ue_time_in_region = 0.0;  // UE-seconds inside the counting disk
  std::vector<std::vector<double>> residence;  // per tier, completed intervals
  std::uint64_t seed = 0;
  std::uint32_t replication = 0;
  std::uint64_t config_hash = 0;
  double time_step = 0.0;
  std::size_t ue_count = 0;
  std::size_t station_count = 0;
};

/// One independent deployment and UE population. Every random draw comes
/// from streams named by (base_seed, replication, entity).
HandoverStats run_replication(const NetworkConfig& cfg, const SimConfig& sim,
                              std::uint32_t replication);

/// Replications 0..sim.replications-1 on up to `threads` workers (0 = use
/// HETHO_THREADS or the hardware concurrency). Results are in replication order.
std::vector<HandoverStats> run_replications(const NetworkConfig& cfg, const SimConfig& sim,
                                            unsigned threads = 0);

/// Pooled rate = sum(counts) / sum(UE-time) * f_u * S, with a 95% t interval
/// across replications. Pairs with zero events are flagged unreliable.
RateMatrix estimate_rate_matrix(const std::vector<HandoverStats>& stats, const NetworkConfig& cfg);

std::uint64_t config_hash(const NetworkConfig& cfg, const SimConfig& sim);

unsigned worker_threads(unsigned requested);

}  // namespace hetho
