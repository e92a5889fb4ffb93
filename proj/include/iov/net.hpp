#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "iov/auction.hpp"
#include "iov/market.hpp"
#include "iov/rng.hpp"

namespace iov::net {

using market::RsuId;
using market::VehicleId;

struct Point {
  double x = 0.0;
  double y = 0.0;

  bool operator==(const Point&) const = default;
};

double distance(Point a, Point b);

struct RsuSite {
  Point position;
  double coverage_m = 500.0;

  bool operator==(const RsuSite&) const = default;
};

struct VehicleState {
  Point position;
  /// Unit heading vector.
  Point heading{1.0, 0.0};
  double speed_mps = 25.0;

  bool operator==(const VehicleState&) const = default;
};

struct MobilityConfig {
  double mean_speed_mps = 25.0;  // 90 km/h
  double speed_stddev_mps = 2.5;
  /// Per-step probability that a vehicle draws a fresh uniform heading.
  double turn_probability = 0.05;
};

struct Topology {
  double width_m = 1000.0;
  double height_m = 1000.0;
  std::vector<RsuSite> rsus;
  std::vector<VehicleState> vehicles;

  /// Four RSUs at the quadrant centres of a 1000 m x 1000 m arena, 500 m coverage.
  static Topology default_grid();
  /// True when every arena point lies within some RSU's coverage.
  bool fully_covered() const;

  bool operator==(const Topology&) const = default;
};

/// Places `count` vehicles uniformly in the arena with random headings and
/// speeds ~ N(mean, stddev).
void populate(Topology& topology, std::uint32_t count, const MobilityConfig& mobility, Rng& rng);

/// Advances every vehicle by speed * dt along its heading, reflecting off the
/// arena walls. Headings are redrawn with the configured turn probability.
Topology step_mobility(const Topology& topology, double dt, Rng& rng,
                       const MobilityConfig& mobility = {});

/// Nearest covering RSU, ties to the lowest RsuId. Falls back to the nearest
/// RSU overall if none covers the vehicle.
RsuId attach_rsu(const Topology& topology, VehicleId vehicle);
std::vector<RsuId> attach_all(const Topology& topology);

struct RateConfig {
  double direct_min_mbps = 5.0;
  double direct_max_mbps = 25.0;
  double coop_min_mbps = 10.0;
  double coop_max_mbps = 50.0;
  double v2v_range_m = 200.0;
};

/// Per-slot link rates in megabits per second.
struct LinkRates {
  /// R^d between each vehicle and its attached RSU, indexed by VehicleId.
  std::vector<double> direct;
  /// R^c keyed by (seller, buyer).
  std::map<std::pair<VehicleId, VehicleId>, double> cooperative;

  std::optional<double> coop(VehicleId seller, VehicleId buyer) const;
  /// Best cooperative rate from any seller to `buyer`, 0 if none.
  double best_coop(VehicleId buyer) const;
};

/// Samples R^d for every vehicle and R^c for every same-RSU seller/buyer pair.
/// Pairs beyond V2V range have their sample scaled by range / distance.
LinkRates sample_rates(const Topology& topology, const market::MarketState& state,
                       const RateConfig& config, Rng& rng);

/// Sum over buyers of content megabits divided by the rate of the link that
/// served them: R^c of the matched seller for winners, R^d for everyone else.
/// Throws ConfigError when a used link has no positive rate.
double transmission_latency(const auction::AuctionOutcome& outcome,
                            const market::MarketState& state, const LinkRates& rates,
                            double chunk_mb);

/// Content megabits of a request of `chunks` chunks.
inline double request_megabits(int chunks, double chunk_mb) { return chunks * chunk_mb * 8.0; }

/// FIFO of pending direct downloads at one RSU.
class RsuQueue {
 public:
  struct Job {
    VehicleId vehicle{};
    double megabits = 0.0;
  };

  explicit RsuQueue(double service_rate_mbps = 50.0);

  void enqueue(VehicleId vehicle, double megabits);
  /// Serves `dt` seconds of work from the head of the queue.
  void serve(double dt);

  double backlog_megabits() const { return backlog_; }
  double service_rate() const { return service_rate_; }
  std::size_t size() const { return jobs_.size(); }

 private:
  std::deque<Job> jobs_;
  double backlog_ = 0.0;
  double service_rate_;
};

/// Queueing latency l_n: backlog divided by service rate, in seconds.
double queue_estimate(const RsuQueue& queue);

}  // namespace iov::net
