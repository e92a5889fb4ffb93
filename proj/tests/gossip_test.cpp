#include <gtest/gtest.h>

#include <cmath>

#include "iov/gossip.hpp"
#include "iov/net.hpp"

namespace iov::gossip {
namespace {

using market::RsuId;

PriceTable random_table(Rng& rng) {
  PriceTable t;
  const auto n = rng.uniform_int(0, 6);
  for (std::int64_t i = 0; i < n; ++i) {
    const std::string key = "k" + std::to_string(rng.uniform_int(0, 4));
    // Narrow ranges so equal stamps with different origins/values occur.
    t.put(key, {static_cast<double>(rng.uniform_int(0, 3)),
                {static_cast<std::uint64_t>(rng.uniform_int(0, 3)),
                 static_cast<std::uint64_t>(rng.uniform_int(0, 1))},
                static_cast<std::uint32_t>(rng.uniform_int(0, 2))});
  }
  return t;
}

GossipGraph line(std::uint32_t n) {
  GossipGraph g;
  g.adjacency.resize(n);
  for (std::uint32_t i = 0; i + 1 < n; ++i) g.add_edge(i, i + 1);
  return g;
}

TEST(Merge, Idempotent) {
  Rng rng(1);
  for (int i = 0; i < 200; ++i) {
    const auto t = random_table(rng);
    EXPECT_EQ(merge_tables(t, t), t);
  }
}

TEST(Merge, LastWriterWins) {
  PriceTable a, b;
  a.put("k", {1.0, {5, 0}, 0});
  b.put("k", {2.0, {3, 0}, 0});
  EXPECT_EQ(merge_tables(a, b).get("k")->value, 1.0);
  EXPECT_EQ(merge_tables(b, a).get("k")->value, 1.0);
}

TEST(Merge, CrdtLaws) {
  Rng rng(2);
  for (int i = 0; i < 2000; ++i) {
    const auto a = random_table(rng);
    const auto b = random_table(rng);
    const auto c = random_table(rng);
    ASSERT_EQ(merge_tables(a, b), merge_tables(b, a));
    ASSERT_EQ(merge_tables(merge_tables(a, b), c), merge_tables(a, merge_tables(b, c)));
  }
}

TEST(Merge, NeverRegresses) {
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const auto a = random_table(rng);
    const auto b = random_table(rng);
    const auto m = merge_tables(a, b);
    for (const auto& [key, e] : a.entries()) {
      ASSERT_FALSE(newer(e, *m.get(key)));
    }
  }
}

TEST(Table, DumpParseRoundTrip) {
  Rng rng(4);
  for (int i = 0; i < 100; ++i) {
    const auto t = random_table(rng);
    EXPECT_EQ(PriceTable::parse(t.dump()), t);
  }
}

TEST(LastPrice, Examples) {
  PriceTable t;
  EXPECT_FALSE(last_price(t, RsuId{0}).has_value());
  record_price(t, RsuId{0}, 5.5, {1, 0}, 0);
  EXPECT_EQ(last_price(t, RsuId{0}), 5.5);
  record_price(t, RsuId{0}, 4.0, {2, 0}, 0);
  EXPECT_EQ(last_price(t, RsuId{0}), 4.0);
  record_price(t, RsuId{0}, 9.0, {1, 5}, 0);
  EXPECT_EQ(last_price(t, RsuId{0}), 4.0);
  EXPECT_FALSE(last_price(t, RsuId{1}).has_value());
}

TEST(Round, LinePropagation) {
  const auto g = line(3);
  std::vector<PriceTable> tables(3);
  tables[0].put("fresh", {1.0, {1, 0}, 0});
  Rng rng(5);
  tables = gossip_round(g, tables, rng);
  EXPECT_TRUE(tables[1].get("fresh").has_value());
  tables = gossip_round(g, tables, rng);
  EXPECT_TRUE(tables[2].get("fresh").has_value());
  EXPECT_TRUE(converged(tables));
}

TEST(Round, ZeroNodes) {
  Rng rng(6);
  EXPECT_TRUE(gossip_round({}, {}, rng).empty());
}

TEST(Round, CompleteGraphWithinBound) {
  int ok = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const std::uint32_t n = 30;
    GossipGraph g;
    g.adjacency.resize(n);
    for (std::uint32_t i = 0; i < n; ++i) {
      for (std::uint32_t j = i + 1; j < n; ++j) g.add_edge(i, j);
    }
    std::vector<PriceTable> tables(n);
    tables[0].put("fresh", {1.0, {1, 0}, 0});
    Rng rng(seed);
    const int bound = static_cast<int>(10.0 * n * std::log(n));
    int rounds = 0;
    while (!converged(tables) && rounds < bound) {
      tables = gossip_round(g, tables, rng);
      ++rounds;
    }
    ok += converged(tables);
  }
  EXPECT_GE(ok, 99);
}

TEST(Graph, FromTopologyUsesRange) {
  net::Topology t = net::Topology::default_grid();
  t.vehicles = {{{0, 0}}, {{150, 0}}, {{400, 0}}};
  const auto g = GossipGraph::from_topology(t, 200.0);
  EXPECT_EQ(g.adjacency[0], std::vector<std::uint32_t>{1});
  EXPECT_TRUE(g.adjacency[2].empty());
  EXPECT_FALSE(g.connected());
  auto h = g;
  h.add_edge(1, 2);
  EXPECT_TRUE(h.connected());
}

}  // namespace
}  // namespace iov::gossip
