#include "iov/gossip.hpp"

#include <algorithm>
#include <tuple>

#include <nlohmann/json.hpp>

#include "iov/error.hpp"
#include "iov/net.hpp"

namespace iov::gossip {

bool newer(const Entry& a, const Entry& b) {
  return std::tie(a.ts, a.origin, a.value) > std::tie(b.ts, b.origin, b.value);
}

bool PriceTable::put(const std::string& key, Entry entry) {
  auto [it, inserted] = entries_.try_emplace(key, entry);
  if (inserted) return true;
  if (!newer(entry, it->second)) return false;
  it->second = entry;
  return true;
}

std::optional<Entry> PriceTable::get(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::string PriceTable::dump() const {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [key, e] : entries_) {
    j[key] = {{"origin", e.origin}, {"seq", e.ts.seq}, {"slot", e.ts.slot}, {"value", e.value}};
  }
  return j.dump();
}

PriceTable PriceTable::parse(const std::string& json_text) {
  PriceTable t;
  const auto j = nlohmann::json::parse(json_text);
  for (const auto& [key, e] : j.items()) {
    t.put(key, {e.at("value").get<double>(),
                {e.at("slot").get<std::uint64_t>(), e.at("seq").get<std::uint64_t>()},
                e.at("origin").get<std::uint32_t>()});
  }
  return t;
}

PriceTable merge_tables(const PriceTable& a, const PriceTable& b) {
  PriceTable out = a;
  for (const auto& [key, e] : b.entries()) out.put(key, e);
  return out;
}

std::string price_key(market::RsuId rsu) { return "price/" + std::to_string(market::index(rsu)); }
std::string queue_key(market::RsuId rsu) { return "queue/" + std::to_string(market::index(rsu)); }
std::string request_key(market::VehicleId vehicle) {
  return "request/" + std::to_string(market::index(vehicle));
}

void record_price(PriceTable& table, market::RsuId rsu, double price, Timestamp ts,
                  std::uint32_t origin) {
  table.put(price_key(rsu), {price, ts, origin});
}

std::optional<double> last_price(const PriceTable& table, market::RsuId rsu) {
  auto e = table.get(price_key(rsu));
  if (!e) return std::nullopt;
  return e->value;
}

void GossipGraph::add_edge(std::uint32_t a, std::uint32_t b) {
  if (a == b) return;
  const auto need = std::max(a, b) + 1;
  if (adjacency.size() < need) adjacency.resize(need);
  auto link = [&](std::uint32_t from, std::uint32_t to) {
    auto& list = adjacency[from];
    auto it = std::lower_bound(list.begin(), list.end(), to);
    if (it == list.end() || *it != to) list.insert(it, to);
  };
  link(a, b);
  link(b, a);
}

bool GossipGraph::connected() const {
  if (adjacency.empty()) return true;
  std::vector<bool> seen(adjacency.size(), false);
  std::vector<std::uint32_t> stack{0};
  seen[0] = true;
  std::size_t count = 1;
  while (!stack.empty()) {
    const auto u = stack.back();
    stack.pop_back();
    for (auto w : adjacency[u]) {
      if (!seen[w]) {
        seen[w] = true;
        ++count;
        stack.push_back(w);
      }
    }
  }
  return count == adjacency.size();
}

GossipGraph GossipGraph::from_topology(const net::Topology& topology, double range_m) {
  GossipGraph g;
  g.adjacency.resize(topology.vehicles.size());
  for (std::uint32_t i = 0; i < topology.vehicles.size(); ++i) {
    for (std::uint32_t j = i + 1; j < topology.vehicles.size(); ++j) {
      if (net::distance(topology.vehicles[i].position, topology.vehicles[j].position) <= range_m) {
        g.add_edge(i, j);
      }
    }
  }
  return g;
}

std::vector<PriceTable> gossip_round(const GossipGraph& graph,
                                     const std::vector<PriceTable>& tables, Rng& rng) {
  if (graph.size() > tables.size()) throw InputError("gossip graph larger than table set");
  std::vector<PriceTable> next = tables;
  for (std::uint32_t u = 0; u < graph.size(); ++u) {
    const auto& nbrs = graph.adjacency[u];
    if (nbrs.empty()) continue;
    const auto peer = nbrs[rng.index(nbrs.size())];
    // push-pull against the pre-round snapshot
    next[u] = merge_tables(next[u], tables[peer]);
    next[peer] = merge_tables(next[peer], tables[u]);
  }
  return next;
}

bool converged(const std::vector<PriceTable>& tables) {
  return std::all_of(tables.begin(), tables.end(),
                     [&](const PriceTable& t) { return t == tables.front(); });
}

}  // namespace iov::gossip
