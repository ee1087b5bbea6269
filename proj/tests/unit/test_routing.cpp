#include <set>

#include <gtest/gtest.h>

#include "wsn/routing.hpp"

using namespace wsn;

namespace {

Network line(int n) {
  TopologyConfig c;
  c.layout = TopologyConfig::Layout::Explicit;
  for (int i = 0; i < n; ++i) c.positions.push_back({{10.0 * i, 0}, std::nullopt});
  return build_topology(c);
}

Network grid(int side) {
  TopologyConfig c;
  c.rows = c.cols = side;
  return build_topology(c);
}

RouteEntry aodv_entry(std::uint32_t seq, int hops, SimTime expires = 1000) {
  RouteEntry e;
  e.destination = 9;
  e.dest_seq_no = seq;
  e.hop_count = hops;
  e.expires_at = expires;
  return e;
}

RouteEntry dsr_entry(std::vector<MoteId> route) {
  RouteEntry e;
  e.destination = route.back();
  e.source_route = std::move(route);
  e.hop_count = static_cast<int>(e.source_route.size()) - 1;
  e.expires_at = 1000;
  return e;
}

bool is_chain(const Network& net, const std::vector<MoteId>& p) {
  for (std::size_t i = 1; i < p.size(); ++i)
    if (!net.linked(p[i - 1], p[i])) return false;
  return std::set<MoteId>(p.begin(), p.end()).size() == p.size();
}

}  // namespace

TEST(Aodv, LineOfFour) {
  const auto net = line(4);
  const auto r = aodv_discover(net, 0, 3);
  ASSERT_TRUE(r.route);
  EXPECT_EQ(r.route->hop_count, 3);
  EXPECT_EQ(r.route->next_hop, 1u);
  EXPECT_EQ(r.route->physical_path, (std::vector<MoteId>{0, 1, 2, 3}));
  EXPECT_GT(r.control_packets, 0);
}

TEST(Aodv, Adjacent) {
  const auto r = aodv_discover(line(2), 0, 1);
  ASSERT_TRUE(r.route);
  EXPECT_EQ(r.route->hop_count, 1);
  EXPECT_EQ(r.route->next_hop, 1u);
}

TEST(Dsr, LineOfFour) {
  const auto r = dsr_discover(line(4), 0, 3);
  ASSERT_TRUE(r.route);
  EXPECT_EQ(r.route->source_route, (std::vector<MoteId>{0, 1, 2, 3}));
}

TEST(Discovery, PartitionedTargetUnreachable) {
  TopologyConfig c;
  c.layout = TopologyConfig::Layout::Explicit;
  c.positions = {{{0, 0}, std::nullopt}, {{10, 0}, std::nullopt}, {{50, 0}, std::nullopt}};
  const auto net = build_topology(c);
  EXPECT_FALSE(aodv_discover(net, 0, 2).route);
  EXPECT_FALSE(dsr_discover(net, 0, 2).route);
}

TEST(InstallRoute, AodvRules) {
  RouteTable t;
  EXPECT_TRUE(install_route(t, aodv_entry(5, 4), RouteVariant::Aodv));
  EXPECT_TRUE(install_route(t, aodv_entry(5, 3), RouteVariant::Aodv));
  EXPECT_FALSE(install_route(t, aodv_entry(5, 3), RouteVariant::Aodv));
  EXPECT_FALSE(install_route(t, aodv_entry(5, 5), RouteVariant::Aodv));
  EXPECT_FALSE(install_route(t, aodv_entry(4, 1), RouteVariant::Aodv));
  EXPECT_TRUE(install_route(t, aodv_entry(6, 9), RouteVariant::Aodv));
  EXPECT_EQ(t.find(9)->hop_count, 9);
}

TEST(InstallRoute, ExpiredCountsAsAbsent) {
  RouteTable t;
  install_route(t, aodv_entry(9, 1, 100), RouteVariant::Aodv);
  EXPECT_FALSE(install_route(t, aodv_entry(1, 5), RouteVariant::Aodv, 99));
  EXPECT_TRUE(install_route(t, aodv_entry(1, 5), RouteVariant::Aodv, 100));
}

TEST(InstallRoute, DsrShorterWinsTiesKeepFirst) {
  RouteTable t;
  EXPECT_TRUE(install_route(t, dsr_entry({0, 1, 2, 9}), RouteVariant::Dsr));
  EXPECT_FALSE(install_route(t, dsr_entry({0, 4, 5, 9}), RouteVariant::Dsr));
  EXPECT_EQ(t.find(9)->source_route, (std::vector<MoteId>{0, 1, 2, 9}));
  EXPECT_TRUE(install_route(t, dsr_entry({0, 3, 9}), RouteVariant::Dsr));
  EXPECT_FALSE(install_route(t, dsr_entry({0, 1, 2, 9}), RouteVariant::Dsr));
}

TEST(HonestCorrectness, AllPairsOnGridMatchBfs) {
  const auto net = grid(5);
  for (MoteId s = 0; s < net.size(); ++s) {
    const auto dist = net.hop_distances(s);
    for (MoteId d = 0; d < net.size(); ++d) {
      if (s == d) continue;
      const auto a = aodv_discover(net, s, d);
      ASSERT_TRUE(a.route) << s << "->" << d;
      EXPECT_EQ(a.route->hop_count, dist[d]);
      EXPECT_TRUE(is_chain(net, a.route->physical_path));
      EXPECT_FALSE(route_corrupted(net, *a.route, s, {}));
      const auto r = dsr_discover(net, s, d);
      ASSERT_TRUE(r.route) << s << "->" << d;
      EXPECT_EQ(static_cast<int>(r.route->source_route.size()) - 1, dist[d]);
      EXPECT_TRUE(is_chain(net, r.route->source_route));
    }
  }
}

TEST(HonestCorrectness, RandomTopologies) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    TopologyConfig c;
    c.layout = TopologyConfig::Layout::Random;
    c.count = 20;
    c.width = c.height = 40;
    c.radio_range = 12;
    c.placement_seed = seed;
    const auto net = build_topology(c);
    for (MoteId d = 1; d < net.size(); ++d) {
      const int want = net.hop_distances(0)[d];
      const auto a = aodv_discover(net, 0, d);
      const auto r = dsr_discover(net, 0, d);
      if (want == kUnreachable) {
        EXPECT_FALSE(a.route);
        EXPECT_FALSE(r.route);
        continue;
      }
      ASSERT_TRUE(a.route && r.route) << "seed " << seed << " dst " << d;
      EXPECT_EQ(a.route->hop_count, want);
      EXPECT_TRUE(is_chain(net, a.route->physical_path));
      EXPECT_EQ(static_cast<int>(r.route->source_route.size()) - 1, want);
      EXPECT_TRUE(is_chain(net, r.route->source_route));
    }
  }
}

TEST(ShortestPath, LowestIdTieBreak) {
  const auto net = grid(3);
  EXPECT_EQ(shortest_path(net, 4, 0), (std::vector<MoteId>{4, 1, 0}));
  EXPECT_EQ(shortest_path(net, 4, 0, {1}), (std::vector<MoteId>{4, 3, 0}));
  EXPECT_EQ(radio_cost(net, {4, 1, 0}), 2);
}

TEST(DsrForwardCheck, DeadOrUnlinkedHop) {
  auto net = line(4);
  EXPECT_TRUE(dsr_forward_check(net, {0, 1, 2, 3}).ok);
  const auto gap = dsr_forward_check(net, {0, 2, 3});
  EXPECT_FALSE(gap.ok);
  EXPECT_EQ(gap.broken_from, 0u);
  EXPECT_EQ(gap.broken_to, 2u);
  net.mote(2).battery.remaining = 0;
  const auto dead = dsr_forward_check(net, {0, 1, 2, 3});
  EXPECT_FALSE(dead.ok);
  EXPECT_EQ(dead.broken_from, 1u);
  EXPECT_EQ(dead.broken_to, 2u);
}

TEST(RouteCorrupted, Criterion) {
  const auto net = grid(3);
  RouteEntry e;
  e.destination = 0;
  e.physical_path = {8, 5, 4, 1, 0};
  e.hop_count = 4;
  EXPECT_FALSE(route_corrupted(net, e, 8, {}));
  EXPECT_FALSE(route_corrupted(net, e, 8, {4}));  // crosses 4 but no longer than the honest detour
  e.hop_count = 2;
  EXPECT_TRUE(route_corrupted(net, e, 8, {4}));   // advertised length is a lie
  e.physical_path = {8, 5, 4, 3, 6, 7};
  e.destination = 7;
  e.hop_count = 5;
  EXPECT_TRUE(route_corrupted(net, e, 8, {4}));   // detour through the attacker
}
