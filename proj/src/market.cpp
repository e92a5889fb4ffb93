#include "iov/market.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "iov/error.hpp"

namespace iov::market {

const BuyerProfile* MarketState::find_buyer(VehicleId v) const {
  auto it = std::lower_bound(buyers.begin(), buyers.end(), v,
                             [](const BuyerProfile& b, VehicleId id) { return b.id < id; });
  return (it != buyers.end() && it->id == v) ? &*it : nullptr;
}

const SellerProfile* MarketState::find_seller(VehicleId v) const {
  auto it = std::lower_bound(sellers.begin(), sellers.end(), v,
                             [](const SellerProfile& s, VehicleId id) { return s.id < id; });
  return (it != sellers.end() && it->id == v) ? &*it : nullptr;
}

std::uint32_t MarketState::participants_at(RsuId rsu) const {
  return static_cast<std::uint32_t>(std::count(attachment.begin(), attachment.end(), rsu));
}

std::uint32_t MarketState::buyers_at(RsuId rsu) const {
  return static_cast<std::uint32_t>(std::count_if(
      buyers.begin(), buyers.end(), [&](const BuyerProfile& b) { return rsu_of(b.id) == rsu; }));
}

std::uint32_t MarketState::sellers_at(RsuId rsu) const {
  return static_cast<std::uint32_t>(std::count_if(
      sellers.begin(), sellers.end(), [&](const SellerProfile& s) { return rsu_of(s.id) == rsu; }));
}

std::string MarketState::dump() const {
  nlohmann::json j;
  j["rsu_count"] = rsu_count;
  auto& roles = j["role"] = nlohmann::json::array();
  for (auto r : role) roles.push_back(r == TraderRole::Buyer ? "B" : "S");
  auto& att = j["attachment"] = nlohmann::json::array();
  for (auto n : attachment) att.push_back(index(n));
  auto& bs = j["buyers"] = nlohmann::json::array();
  for (const auto& b : buyers) {
    bs.push_back({{"id", index(b.id)},
                  {"chunks", b.chunks_requested},
                  {"valuation", b.valuation},
                  {"bid", b.bid},
                  {"entry", static_cast<int>(b.entry)}});
  }
  auto& ss = j["sellers"] = nlohmann::json::array();
  for (const auto& s : sellers) {
    ss.push_back({{"id", index(s.id)},
                  {"power_mw", s.transmit_power_mw},
                  {"valuation", s.valuation},
                  {"ask", s.ask}});
  }
  return j.dump();
}

double buyer_valuation(int chunks) {
  if (chunks < 0) throw InputError("chunk count must be non-negative");
  return std::log1p(static_cast<double>(chunks) / 10.0);
}

double seller_valuation(double power_mw, double kappa) {
  if (!(power_mw >= 0.0)) throw InputError("transmit power must be non-negative");
  if (!(kappa > 0.0)) throw InputError("kappa must be positive");
  return kappa * power_mw;
}

double buyer_utility(double valuation, std::optional<double> payment) {
  return payment ? valuation - *payment : 0.0;
}

double seller_utility(double valuation, std::optional<double> revenue) {
  return revenue ? *revenue - valuation : 0.0;
}

MarketState sample_population(const PopulationConfig& config, Rng& rng,
                              std::span<const RsuId> attachment) {
  if (!attachment.empty() && attachment.size() != config.vehicles) {
    throw InputError("attachment must list one RSU per vehicle");
  }
  MarketState state;
  state.rsu_count = config.rsus;
  state.role.reserve(config.vehicles);
  state.attachment.assign(config.vehicles, RsuId{0});
  if (!attachment.empty()) std::copy(attachment.begin(), attachment.end(), state.attachment.begin());

  for (std::uint32_t v = 0; v < config.vehicles; ++v) {
    const VehicleId id{v};
    // Draw order is fixed: role, then chunk count or power.
    const bool is_buyer = rng.uniform01() >= config.buyer_threshold;
    if (is_buyer) {
      state.role.push_back(TraderRole::Buyer);
      BuyerProfile b;
      b.id = id;
      b.chunks_requested = static_cast<int>(rng.uniform_int(1, config.max_chunks));
      b.valuation = buyer_valuation(b.chunks_requested);
      b.bid = b.valuation;
      state.buyers.push_back(b);
    } else {
      state.role.push_back(TraderRole::Seller);
      SellerProfile s;
      s.id = id;
      s.transmit_power_mw = rng.uniform(0.0, config.max_power_mw);
      s.valuation = seller_valuation(s.transmit_power_mw, config.kappa);
      s.ask = s.valuation;
      state.sellers.push_back(s);
    }
  }
  return state;
}

}  // namespace iov::market
