#include <gtest/gtest.h>

#include "wsn/topology.hpp"

using namespace wsn;

namespace {

TopologyConfig grid(int rows, int cols) {
  TopologyConfig c;
  c.layout = TopologyConfig::Layout::Grid;
  c.rows = rows;
  c.cols = cols;
  c.spacing = 10;
  c.radio_range = 10;
  return c;
}

TopologyConfig line(std::vector<double> xs, double range = 10) {
  TopologyConfig c;
  c.layout = TopologyConfig::Layout::Explicit;
  for (double x : xs) c.positions.push_back({{x, 0}, std::nullopt});
  c.radio_range = range;
  return c;
}

}  // namespace

TEST(Links, UnitDisk) {
  const auto net = build_topology(line({0, 5, 20}));
  EXPECT_TRUE(net.linked(0, 1));
  EXPECT_TRUE(net.linked(1, 0));
  EXPECT_FALSE(net.linked(1, 2));
  EXPECT_FALSE(net.linked(0, 2));
}

TEST(Links, ShorterRangeWins) {
  auto cfg = line({0, 5});
  cfg.positions[1].radio_range = 4;
  const auto net = build_topology(cfg);
  EXPECT_FALSE(net.linked(0, 1));
  EXPECT_FALSE(net.linked(1, 0));
}

TEST(Grid, DegreesOnThreeByThree) {
  const auto net = build_topology(grid(3, 3));
  ASSERT_EQ(net.size(), 9u);
  const std::vector<std::size_t> expect{2, 3, 2, 3, 4, 3, 2, 3, 2};
  for (MoteId i = 0; i < 9; ++i) EXPECT_EQ(net.neighbors(i).size(), expect[i]) << "mote " << i;
  EXPECT_EQ(net.mote(5).position.x, 20);
  EXPECT_EQ(net.mote(5).position.y, 10);
}

TEST(Build, Errors) {
  EXPECT_THROW(build_topology(grid(0, 0)), TopologyError);
  auto bad_sink = grid(2, 2);
  bad_sink.sink = 4;
  EXPECT_THROW(build_topology(bad_sink), TopologyError);
  auto neg = grid(2, 2);
  neg.radio_range = -1;
  EXPECT_THROW(build_topology(neg), TopologyError);
}

TEST(Build, RolesAndBatteries) {
  auto cfg = grid(2, 2);
  cfg.sink = 3;
  cfg.initial_energy_mj = 2.5;
  const auto net = build_topology(cfg);
  EXPECT_EQ(net.mote(3).role, Role::Sink);
  EXPECT_EQ(net.mote(0).role, Role::Honest);
  EXPECT_EQ(net.mote(0).battery.remaining, 2'500'000);
}

TEST(Random, DeterministicPerSeed) {
  TopologyConfig c;
  c.layout = TopologyConfig::Layout::Random;
  c.count = 30;
  c.placement_seed = 4;
  const auto a = build_topology(c), b = build_topology(c);
  c.placement_seed = 5;
  const auto d = build_topology(c);
  bool differs = false;
  for (MoteId i = 0; i < 30; ++i) {
    EXPECT_EQ(a.mote(i).position, b.mote(i).position);
    differs |= !(a.mote(i).position == d.mote(i).position);
  }
  EXPECT_TRUE(differs);
}

TEST(BeaconTree, SinkAndLine) {
  const auto net = build_topology(line({0, 10, 20}));
  const auto t = beacon_tree_route(net, 0);
  EXPECT_EQ(t.hops[0], 0);
  EXPECT_EQ(t.next_hop[2], 1u);
  EXPECT_EQ(t.hops[2], 2);
  EXPECT_EQ(t.path_to_root(2), (std::vector<MoteId>{2, 1, 0}));
}

TEST(BeaconTree, CenterOfThreeByThree) {
  const auto t = beacon_tree_route(build_topology(grid(3, 3)), 0);
  EXPECT_EQ(t.hops[4], 2);
  EXPECT_EQ(t.next_hop[4], 1u);
}

TEST(BeaconTree, UnreachableFlagged) {
  const auto t = beacon_tree_route(build_topology(line({0, 10, 50})), 0);
  EXPECT_EQ(t.unreachable(), std::vector<MoteId>{2});
  EXPECT_FALSE(t.next_hop[2]);
}

TEST(BeaconTree, NextHopAlwaysCloserOnRandomLayouts) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    TopologyConfig c;
    c.layout = TopologyConfig::Layout::Random;
    c.count = 25;
    c.width = c.height = 50;
    c.radio_range = 15;
    c.placement_seed = seed;
    const auto net = build_topology(c);
    const auto t = beacon_tree_route(net, 0);
    for (MoteId v = 1; v < net.size(); ++v) {
      if (t.hops[v] == kUnreachable) continue;
      ASSERT_TRUE(t.next_hop[v]);
      EXPECT_TRUE(net.linked(v, *t.next_hop[v]));
      EXPECT_EQ(t.hops[*t.next_hop[v]], t.hops[v] - 1) << "seed " << seed << " mote " << v;
    }
  }
}

TEST(BeaconTree, ForgedAdvertisementAttractsNeighbors) {
  const auto net = build_topology(grid(5, 5));
  const auto t = beacon_tree_route(net, 0, {{12, 0}});
  for (MoteId n : net.neighbors(12)) {
    EXPECT_EQ(t.next_hop[n], 12u) << "mote " << n;
  }
  EXPECT_EQ(t.next_hop[12], beacon_tree_route(net, 0).next_hop[12]);
}
