#include "iov/net.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "iov/error.hpp"

namespace iov::net {

double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

Topology Topology::default_grid() {
  Topology t;
  t.rsus = {{{250.0, 250.0}, 500.0},
            {{750.0, 250.0}, 500.0},
            {{250.0, 750.0}, 500.0},
            {{750.0, 750.0}, 500.0}};
  return t;
}

bool Topology::fully_covered() const {
  // Coverage discs are convex, so checking a fine lattice including the
  // corners is enough for the rectangular layouts used here.
  constexpr int kSteps = 40;
  for (int i = 0; i <= kSteps; ++i) {
    for (int j = 0; j <= kSteps; ++j) {
      const Point p{width_m * i / kSteps, height_m * j / kSteps};
      const bool covered = std::any_of(rsus.begin(), rsus.end(), [&](const RsuSite& r) {
        return distance(p, r.position) <= r.coverage_m;
      });
      if (!covered) return false;
    }
  }
  return true;
}

namespace {

Point random_heading(Rng& rng) {
  const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
  return {std::cos(angle), std::sin(angle)};
}

// Reflects a coordinate into [0, limit], flipping the heading component on each bounce.
void reflect(double& coord, double& dir, double limit) {
  while (coord < 0.0 || coord > limit) {
    if (coord < 0.0) {
      coord = -coord;
    } else {
      coord = 2.0 * limit - coord;
    }
    dir = -dir;
  }
}

}  // namespace

void populate(Topology& topology, std::uint32_t count, const MobilityConfig& mobility, Rng& rng) {
  topology.vehicles.clear();
  topology.vehicles.reserve(count);
  for (std::uint32_t v = 0; v < count; ++v) {
    VehicleState s;
    s.position = {rng.uniform(0.0, topology.width_m), rng.uniform(0.0, topology.height_m)};
    s.heading = random_heading(rng);
    s.speed_mps = std::max(0.0, rng.normal(mobility.mean_speed_mps, mobility.speed_stddev_mps));
    topology.vehicles.push_back(s);
  }
}

Topology step_mobility(const Topology& topology, double dt, Rng& rng,
                       const MobilityConfig& mobility) {
  Topology next = topology;
  if (dt <= 0.0) return next;
  for (auto& v : next.vehicles) {
    if (mobility.turn_probability > 0.0 && rng.bernoulli(mobility.turn_probability)) {
      v.heading = random_heading(rng);
    }
    v.position.x += v.heading.x * v.speed_mps * dt;
    v.position.y += v.heading.y * v.speed_mps * dt;
    reflect(v.position.x, v.heading.x, next.width_m);
    reflect(v.position.y, v.heading.y, next.height_m);
  }
  return next;
}

RsuId attach_rsu(const Topology& topology, VehicleId vehicle) {
  const Point p = topology.vehicles.at(market::index(vehicle)).position;
  std::optional<std::size_t> best_covering;
  std::size_t best_any = 0;
  double covering_d = std::numeric_limits<double>::infinity();
  double any_d = std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n < topology.rsus.size(); ++n) {
    const double d = distance(p, topology.rsus[n].position);
    // strict < keeps the lowest id on ties
    if (d < any_d) {
      any_d = d;
      best_any = n;
    }
    if (d <= topology.rsus[n].coverage_m && d < covering_d) {
      covering_d = d;
      best_covering = n;
    }
  }
  return RsuId{static_cast<std::uint32_t>(best_covering.value_or(best_any))};
}

std::vector<RsuId> attach_all(const Topology& topology) {
  std::vector<RsuId> out;
  out.reserve(topology.vehicles.size());
  for (std::uint32_t v = 0; v < topology.vehicles.size(); ++v) {
    out.push_back(attach_rsu(topology, VehicleId{v}));
  }
  return out;
}

std::optional<double> LinkRates::coop(VehicleId seller, VehicleId buyer) const {
  auto it = cooperative.find({seller, buyer});
  if (it == cooperative.end()) return std::nullopt;
  return it->second;
}

double LinkRates::best_coop(VehicleId buyer) const {
  double best = 0.0;
  for (const auto& [key, rate] : cooperative) {
    if (key.second == buyer) best = std::max(best, rate);
  }
  return best;
}

LinkRates sample_rates(const Topology& topology, const market::MarketState& state,
                       const RateConfig& config, Rng& rng) {
  LinkRates rates;
  rates.direct.reserve(state.vehicle_count());
  for (std::uint32_t v = 0; v < state.vehicle_count(); ++v) {
    rates.direct.push_back(rng.uniform(config.direct_min_mbps, config.direct_max_mbps));
  }
  for (const auto& s : state.sellers) {
    for (const auto& b : state.buyers) {
      if (state.rsu_of(s.id) != state.rsu_of(b.id)) continue;
      double rate = rng.uniform(config.coop_min_mbps, config.coop_max_mbps);
      if (market::index(s.id) < topology.vehicles.size() &&
          market::index(b.id) < topology.vehicles.size()) {
        const double d = distance(topology.vehicles[market::index(s.id)].position,
                                  topology.vehicles[market::index(b.id)].position);
        if (d > config.v2v_range_m) rate *= config.v2v_range_m / d;
      }
      rates.cooperative[{s.id, b.id}] = rate;
    }
  }
  return rates;
}

double transmission_latency(const auction::AuctionOutcome& outcome,
                            const market::MarketState& state, const LinkRates& rates,
                            double chunk_mb) {
  double total = 0.0;
  for (const auto& b : state.buyers) {
    const double mb = request_megabits(b.chunks_requested, chunk_mb);
    double rate = 0.0;
    if (const auto* t = outcome.trade_for_buyer(b.id)) {
      rate = rates.coop(t->seller, b.id).value_or(0.0);
      if (!(rate > 0.0)) {
        throw ConfigError("rates.cooperative",
                          "no rate for seller " + std::to_string(market::index(t->seller)) +
                              " -> buyer " + std::to_string(market::index(b.id)));
      }
    } else {
      if (market::index(b.id) < rates.direct.size()) rate = rates.direct[market::index(b.id)];
      if (!(rate > 0.0)) {
        throw ConfigError("rates.direct",
                          "no rate for vehicle " + std::to_string(market::index(b.id)));
      }
    }
    total += mb / rate;
  }
  return total;
}

RsuQueue::RsuQueue(double service_rate_mbps) : service_rate_(service_rate_mbps) {
  if (!(service_rate_mbps > 0.0)) throw InputError("service rate must be positive");
}

void RsuQueue::enqueue(VehicleId vehicle, double megabits) {
  if (megabits < 0.0) throw InputError("job size must be non-negative");
  jobs_.push_back({vehicle, megabits});
  backlog_ += megabits;
}

void RsuQueue::serve(double dt) {
  double budget = service_rate_ * dt;
  while (budget > 0.0 && !jobs_.empty()) {
    Job& head = jobs_.front();
    const double take = std::min(budget, head.megabits);
    head.megabits -= take;
    budget -= take;
    if (head.megabits <= 0.0) jobs_.pop_front();
  }
  // Recompute from the jobs to avoid drift from repeated subtraction.
  backlog_ = 0.0;
  for (const auto& j : jobs_) backlog_ += j.megabits;
}

double queue_estimate(const RsuQueue& queue) {
  return queue.backlog_megabits() / queue.service_rate();
}

}  // namespace iov::net
