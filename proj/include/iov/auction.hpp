#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "iov/market.hpp"

namespace iov::auction {

using market::RsuId;
using market::Submarket;
using market::VehicleId;

/// One pooled report: who, and the bid (buyers) or ask (sellers).
struct PoolEntry {
  VehicleId id{};
  double value = 0.0;

  bool operator==(const PoolEntry&) const = default;
};

/// Buyers of one RSU's mundane submarket, bids descending, ties by ascending id.
struct BuyerPool {
  std::vector<PoolEntry> entries;

  void insert(PoolEntry e);
  std::size_t size() const { return entries.size(); }
  bool empty() const { return entries.empty(); }
};

/// Unmatched sellers of one RSU, asks ascending, ties by ascending id.
struct SellerPool {
  std::vector<PoolEntry> entries;

  void insert(PoolEntry e);
  /// Returns false when `id` is not pooled.
  bool remove(VehicleId id);
  std::size_t size() const { return entries.size(); }
  bool empty() const { return entries.empty(); }
};

/// An executed buyer-seller match.
struct Trade {
  VehicleId buyer{};
  VehicleId seller{};
  RsuId rsu{};
  Submarket submarket = Submarket::Mundane;
  double buyer_payment = 0.0;
  double seller_revenue = 0.0;

  bool operator==(const Trade&) const = default;
};

/// Sparse supply (X) and demand (Y) matrices over (buyer, seller) pairs.
struct AllocationMatrix {
  std::vector<std::pair<VehicleId, VehicleId>> supply;  // x_{v,v'} = 1
  std::vector<std::pair<VehicleId, VehicleId>> demand;  // y_{v',v} = 1

  void set(VehicleId buyer, VehicleId seller);
  bool x(VehicleId buyer, VehicleId seller) const;
  bool y(VehicleId buyer, VehicleId seller) const;
  /// Number of buyers a seller is sold to (must be <= 1).
  std::size_t seller_row_sum(VehicleId seller) const;
  /// Each seller sold at most once, and every X entry is backed by Y.
  bool feasible() const;
};

/// Allocation plus pricing for one slot, all RSUs.
struct AuctionOutcome {
  AllocationMatrix allocation;
  std::vector<Trade> trades;
  /// beta_n per RSU, indexed by RsuId.
  std::vector<double> rsu_budget;

  void add(const Trade& t);
  const Trade* trade_for_buyer(VehicleId v) const;
  const Trade* trade_for_seller(VehicleId v) const;
  std::optional<double> payment_of(VehicleId buyer) const;
  std::optional<double> revenue_of(VehicleId seller) const;
};

enum class UrgentMode : std::uint8_t {
  /// Highest ask wins; buyer pays the highest other ask, seller receives the highest ask.
  HighestAsk,
  /// Lowest ask wins; both sides price at the second-lowest ask.
  LowestAsk,
};

enum class UrgentStatus : std::uint8_t { Traded, ReserveNotMet, NoRunnerUp };

struct UrgentResult {
  UrgentStatus status = UrgentStatus::NoRunnerUp;
  VehicleId seller{};
  double buyer_payment = 0.0;
  double seller_revenue = 0.0;

  bool traded() const { return status == UrgentStatus::Traded; }
};

struct MundaneResult {
  /// Breakeven index: largest k with b_k >= s_k.
  std::size_t breakeven = 0;
  /// True when the trade-reduction branch priced the trades.
  bool reduced = false;
  std::vector<Trade> trades;
};

/// Mundane-submarket buyers (entry == Mundane) and sellers attached to `rsu`,
/// minus anyone already matched in `prior`.
std::pair<BuyerPool, SellerPool> build_pools(const market::MarketState& state, RsuId rsu,
                                             const AuctionOutcome* prior = nullptr);

/// Instant single-side clearing of one urgent request. Pure: the caller removes
/// the winning seller from the pool on success.
UrgentResult clear_urgent(const market::BuyerProfile& buyer, const SellerPool& sellers,
                          UrgentMode mode);

/// McAfee double-auction clearing of one RSU's mundane pools. Trades carry
/// RsuId{0} and Submarket::Mundane; callers relabel the RSU.
MundaneResult clear_mundane(const BuyerPool& buyers, const SellerPool& sellers);

/// Clears a whole slot: urgent requests in ascending buyer id against the
/// shrinking seller pool of their RSU, then every RSU's mundane submarket.
AuctionOutcome clear_market(const market::MarketState& state, UrgentMode mode);

/// Sum of matched buyer and seller valuations.
double social_welfare(const AuctionOutcome& outcome, const market::MarketState& state);

/// Buyer payments minus seller revenues at `rsu`.
double local_budget(const AuctionOutcome& outcome, RsuId rsu);

double global_budget(std::span<const double> per_rsu_budgets);

}  // namespace iov::auction
