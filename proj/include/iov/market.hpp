#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "iov/rng.hpp"

namespace iov::market {

/// Index of a vehicle within one simulation run, in [0, V).
enum class VehicleId : std::uint32_t {};
/// Index of a road-side unit, in [0, N).
enum class RsuId : std::uint32_t {};

constexpr std::uint32_t index(VehicleId v) { return static_cast<std::uint32_t>(v); }
constexpr std::uint32_t index(RsuId n) { return static_cast<std::uint32_t>(n); }

enum class TraderRole : std::uint8_t { Buyer, Seller };

/// Submarket a buyer enters at a slot. Urgent = action 0, Mundane = action 1.
enum class Submarket : std::uint8_t { Urgent = 0, Mundane = 1 };

struct BuyerProfile {
  VehicleId id{};
  int chunks_requested = 1;
  double valuation = 0.0;
  double bid = 0.0;
  Submarket entry = Submarket::Mundane;

  bool operator==(const BuyerProfile&) const = default;
};

struct SellerProfile {
  VehicleId id{};
  double transmit_power_mw = 0.0;
  double valuation = 0.0;
  double ask = 0.0;

  bool operator==(const SellerProfile&) const = default;
};

struct PopulationConfig {
  std::uint32_t vehicles = 40;
  std::uint32_t rsus = 4;
  int max_chunks = 10;
  double max_power_mw = 10.0;
  /// Seller value per milliwatt of transmit power.
  double kappa = 0.07;
  /// A vehicle is a buyer iff its U[0,1) request draw is >= this threshold.
  double buyer_threshold = 0.5;

  bool operator==(const PopulationConfig&) const = default;
};

/// One slot's view of the market: roles, attachments and trader profiles.
///
/// `buyers` and `sellers` are sorted by ascending VehicleId; `role` and
/// `attachment` are indexed by VehicleId.
struct MarketState {
  std::uint32_t rsu_count = 0;
  std::vector<TraderRole> role;
  std::vector<RsuId> attachment;
  std::vector<BuyerProfile> buyers;
  std::vector<SellerProfile> sellers;

  std::uint32_t vehicle_count() const { return static_cast<std::uint32_t>(role.size()); }
  const BuyerProfile* find_buyer(VehicleId v) const;
  const SellerProfile* find_seller(VehicleId v) const;
  RsuId rsu_of(VehicleId v) const { return attachment.at(index(v)); }

  /// Number of buyers plus sellers attached to `rsu`.
  std::uint32_t participants_at(RsuId rsu) const;
  std::uint32_t buyers_at(RsuId rsu) const;
  std::uint32_t sellers_at(RsuId rsu) const;

  /// Canonical JSON text; two states are equal iff their dumps are equal.
  std::string dump() const;

  bool operator==(const MarketState&) const = default;
};

/// ln(1 + chunks / 10).
double buyer_valuation(int chunks);

/// kappa * power. Throws InputError for negative power or non-positive kappa.
double seller_valuation(double power_mw, double kappa);

/// valuation - payment when matched, 0 otherwise.
double buyer_utility(double valuation, std::optional<double> payment);

/// revenue - valuation when matched, 0 otherwise.
double seller_utility(double valuation, std::optional<double> revenue);

/// Draws roles, chunk counts and transmit powers for every vehicle, with
/// truthful reports. `attachment` may be empty (everyone at RSU 0) or hold
/// exactly one RSU per vehicle.
MarketState sample_population(const PopulationConfig& config, Rng& rng,
                              std::span<const RsuId> attachment = {});

}  // namespace iov::market
