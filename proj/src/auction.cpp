#include "iov/auction.hpp"

#include <algorithm>
#include <numeric>

namespace iov::auction {

namespace {

bool bid_before(const PoolEntry& a, const PoolEntry& b) {
  if (a.value != b.value) return a.value > b.value;
  return a.id < b.id;
}

bool ask_before(const PoolEntry& a, const PoolEntry& b) {
  if (a.value != b.value) return a.value < b.value;
  return a.id < b.id;
}

}  // namespace

void BuyerPool::insert(PoolEntry e) {
  entries.insert(std::upper_bound(entries.begin(), entries.end(), e, bid_before), e);
}

void SellerPool::insert(PoolEntry e) {
  entries.insert(std::upper_bound(entries.begin(), entries.end(), e, ask_before), e);
}

bool SellerPool::remove(VehicleId id) {
  auto it = std::find_if(entries.begin(), entries.end(),
                         [&](const PoolEntry& e) { return e.id == id; });
  if (it == entries.end()) return false;
  entries.erase(it);
  return true;
}

void AllocationMatrix::set(VehicleId buyer, VehicleId seller) {
  supply.emplace_back(buyer, seller);
  demand.emplace_back(buyer, seller);
}

bool AllocationMatrix::x(VehicleId buyer, VehicleId seller) const {
  return std::find(supply.begin(), supply.end(), std::pair{buyer, seller}) != supply.end();
}

bool AllocationMatrix::y(VehicleId buyer, VehicleId seller) const {
  return std::find(demand.begin(), demand.end(), std::pair{buyer, seller}) != demand.end();
}

std::size_t AllocationMatrix::seller_row_sum(VehicleId seller) const {
  return static_cast<std::size_t>(std::count_if(
      demand.begin(), demand.end(), [&](const auto& p) { return p.second == seller; }));
}

bool AllocationMatrix::feasible() const {
  for (const auto& [buyer, seller] : demand) {
    if (seller_row_sum(seller) > 1) return false;
  }
  for (const auto& [buyer, seller] : supply) {
    if (!y(buyer, seller)) return false;
  }
  return true;
}

void AuctionOutcome::add(const Trade& t) {
  allocation.set(t.buyer, t.seller);
  trades.push_back(t);
  const auto n = market::index(t.rsu);
  if (rsu_budget.size() <= n) rsu_budget.resize(n + 1, 0.0);
  rsu_budget[n] += t.buyer_payment - t.seller_revenue;
}

const Trade* AuctionOutcome::trade_for_buyer(VehicleId v) const {
  auto it = std::find_if(trades.begin(), trades.end(), [&](const Trade& t) { return t.buyer == v; });
  return it == trades.end() ? nullptr : &*it;
}

const Trade* AuctionOutcome::trade_for_seller(VehicleId v) const {
  auto it =
      std::find_if(trades.begin(), trades.end(), [&](const Trade& t) { return t.seller == v; });
  return it == trades.end() ? nullptr : &*it;
}

std::optional<double> AuctionOutcome::payment_of(VehicleId buyer) const {
  const Trade* t = trade_for_buyer(buyer);
  return t ? std::optional{t->buyer_payment} : std::nullopt;
}

std::optional<double> AuctionOutcome::revenue_of(VehicleId seller) const {
  const Trade* t = trade_for_seller(seller);
  return t ? std::optional{t->seller_revenue} : std::nullopt;
}

std::pair<BuyerPool, SellerPool> build_pools(const market::MarketState& state, RsuId rsu,
                                             const AuctionOutcome* prior) {
  BuyerPool buyers;
  SellerPool sellers;
  for (const auto& b : state.buyers) {
    if (state.rsu_of(b.id) != rsu || b.entry != Submarket::Mundane) continue;
    if (prior && prior->trade_for_buyer(b.id)) continue;
    buyers.insert({b.id, b.bid});
  }
  for (const auto& s : state.sellers) {
    if (state.rsu_of(s.id) != rsu) continue;
    if (prior && prior->trade_for_seller(s.id)) continue;
    sellers.insert({s.id, s.ask});
  }
  return {std::move(buyers), std::move(sellers)};
}

UrgentResult clear_urgent(const market::BuyerProfile& buyer, const SellerPool& sellers,
                          UrgentMode mode) {
  UrgentResult result;
  if (sellers.size() < 2) {
    result.status = UrgentStatus::NoRunnerUp;
    return result;
  }
  const auto& asks = sellers.entries;  // ascending, ties by id
  if (mode == UrgentMode::HighestAsk) {
    // Highest ask wins; among equal highest asks the lowest id.
    const double top = asks.back().value;
    auto winner = std::find_if(asks.begin(), asks.end(),
                               [&](const PoolEntry& e) { return e.value == top; });
    double runner_up = -1.0;
    for (auto it = asks.begin(); it != asks.end(); ++it) {
      if (it != winner) runner_up = std::max(runner_up, it->value);
    }
    result.seller = winner->id;
    result.buyer_payment = runner_up;
    result.seller_revenue = top;
  } else {
    result.seller = asks[0].id;
    result.buyer_payment = asks[1].value;
    result.seller_revenue = asks[1].value;
  }
  result.status = buyer.bid >= result.buyer_payment ? UrgentStatus::Traded
                                                    : UrgentStatus::ReserveNotMet;
  return result;
}

MundaneResult clear_mundane(const BuyerPool& buyers, const SellerPool& sellers) {
  MundaneResult result;
  const auto& b = buyers.entries;
  const auto& s = sellers.entries;
  const std::size_t depth = std::min(b.size(), s.size());
  std::size_t k = 0;
  while (k < depth && b[k].value >= s[k].value) ++k;
  result.breakeven = k;
  if (k == 0) return result;

  auto trade = [](const PoolEntry& buyer, const PoolEntry& seller, double pay, double receive) {
    Trade t;
    t.buyer = buyer.id;
    t.seller = seller.id;
    t.submarket = Submarket::Mundane;
    t.buyer_payment = pay;
    t.seller_revenue = receive;
    return t;
  };

  if (k < b.size() && k < s.size()) {
    const double price = (b[k].value + s[k].value) / 2.0;
    const auto buyers_in = std::count_if(b.begin(), b.end(),
                                         [&](const PoolEntry& e) { return e.value >= price; });
    const auto sellers_in = std::count_if(s.begin(), s.end(),
                                          [&](const PoolEntry& e) { return e.value <= price; });
    if (static_cast<std::size_t>(buyers_in) == k && static_cast<std::size_t>(sellers_in) == k) {
      for (std::size_t i = 0; i < k; ++i) result.trades.push_back(trade(b[i], s[i], price, price));
      return result;
    }
  }

  result.reduced = true;
  const double buyer_price = b[k - 1].value;
  const double seller_price = s[k - 1].value;
  for (std::size_t i = 0; i + 1 < k; ++i) {
    result.trades.push_back(trade(b[i], s[i], buyer_price, seller_price));
  }
  return result;
}

AuctionOutcome clear_market(const market::MarketState& state, UrgentMode mode) {
  AuctionOutcome outcome;
  outcome.rsu_budget.assign(state.rsu_count, 0.0);

  std::vector<SellerPool> pools(state.rsu_count);
  for (const auto& s : state.sellers) pools.at(market::index(state.rsu_of(s.id))).insert({s.id, s.ask});

  for (const auto& b : state.buyers) {
    if (b.entry != Submarket::Urgent) continue;
    const RsuId rsu = state.rsu_of(b.id);
    auto& pool = pools.at(market::index(rsu));
    const UrgentResult r = clear_urgent(b, pool, mode);
    if (!r.traded()) continue;
    Trade t{b.id, r.seller, rsu, Submarket::Urgent, r.buyer_payment, r.seller_revenue};
    outcome.add(t);
    pool.remove(r.seller);
  }

  for (std::uint32_t n = 0; n < state.rsu_count; ++n) {
    const RsuId rsu{n};
    BuyerPool buyers;
    for (const auto& b : state.buyers) {
      if (b.entry == Submarket::Mundane && state.rsu_of(b.id) == rsu) buyers.insert({b.id, b.bid});
    }
    MundaneResult r = clear_mundane(buyers, pools[n]);
    for (Trade& t : r.trades) {
      t.rsu = rsu;
      outcome.add(t);
    }
  }
  return outcome;
}

double social_welfare(const AuctionOutcome& outcome, const market::MarketState& state) {
  double sw = 0.0;
  for (const auto& [buyer, seller] : outcome.allocation.supply) {
    if (const auto* b = state.find_buyer(buyer)) sw += b->valuation;
  }
  for (const auto& [buyer, seller] : outcome.allocation.demand) {
    if (const auto* s = state.find_seller(seller)) sw += s->valuation;
  }
  return sw;
}

double local_budget(const AuctionOutcome& outcome, RsuId rsu) {
  double budget = 0.0;
  for (const auto& t : outcome.trades) {
    if (t.rsu == rsu) budget += t.buyer_payment - t.seller_revenue;
  }
  return budget;
}

double global_budget(std::span<const double> per_rsu_budgets) {
  return std::accumulate(per_rsu_budgets.begin(), per_rsu_budgets.end(), 0.0);
}

}  // namespace iov::auction
