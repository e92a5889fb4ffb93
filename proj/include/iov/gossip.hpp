#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "iov/market.hpp"
#include "iov/rng.hpp"

namespace iov::net {
struct Topology;
}

namespace iov::gossip {

/// Writer-assigned logical clock: (slot, sequence within slot).
struct Timestamp {
  std::uint64_t slot = 0;
  std::uint64_t seq = 0;

  auto operator<=>(const Timestamp&) const = default;
};

struct Entry {
  double value = 0.0;
  Timestamp ts;
  std::uint32_t origin = 0;

  bool operator==(const Entry&) const = default;
};

/// Last-writer-wins map replicated by gossip. Keys used by the simulator:
/// "price/<rsu>", "queue/<rsu>", "request/<vehicle>".
class PriceTable {
 public:
  /// Applies a write if it is newer than the stored entry. Returns true when applied.
  bool put(const std::string& key, Entry entry);
  std::optional<Entry> get(const std::string& key) const;

  const std::map<std::string, Entry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

  /// Canonical key-sorted JSON.
  std::string dump() const;
  static PriceTable parse(const std::string& json_text);

  bool operator==(const PriceTable&) const = default;

 private:
  std::map<std::string, Entry> entries_;
};

/// Total order used for last-writer-wins: timestamp, then origin, then value
/// (the last only separates conflicting writes carrying the same stamp).
bool newer(const Entry& a, const Entry& b);

/// Per-key last-writer-wins union.
PriceTable merge_tables(const PriceTable& a, const PriceTable& b);

std::string price_key(market::RsuId rsu);
std::string queue_key(market::RsuId rsu);
std::string request_key(market::VehicleId vehicle);

void record_price(PriceTable& table, market::RsuId rsu, double price, Timestamp ts,
                  std::uint32_t origin);
std::optional<double> last_price(const PriceTable& table, market::RsuId rsu);

/// Undirected communication graph over vehicles.
struct GossipGraph {
  std::vector<std::vector<std::uint32_t>> adjacency;

  std::size_t size() const { return adjacency.size(); }
  void add_edge(std::uint32_t a, std::uint32_t b);
  bool connected() const;

  /// Edges between vehicles within `range_m` of each other.
  static GossipGraph from_topology(const net::Topology& topology, double range_m);
};

/// One synchronous push-pull round: every node picks a uniform random
/// neighbour and both merge the other's pre-round table.
std::vector<PriceTable> gossip_round(const GossipGraph& graph,
                                     const std::vector<PriceTable>& tables, Rng& rng);

/// True when every table equals the first.
bool converged(const std::vector<PriceTable>& tables);

}  // namespace iov::gossip
