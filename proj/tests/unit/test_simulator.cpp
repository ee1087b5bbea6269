#include <gtest/gtest.h>

#include "wsn/simulator.hpp"

using namespace wsn;

namespace {

TrafficCommand unicast(MoteId src, SimTime at, int count = 1, SimTime interval = 0,
                       Reliability rel = Reliability::Unreliable, std::optional<MoteId> dst = std::nullopt) {
  TrafficCommand t;
  t.src = src;
  t.dst = dst;
  t.at_ms = at;
  t.count = count;
  t.interval_ms = interval;
  t.reliability = rel;
  t.payload = to_bytes("reading-0123456789ab");  // 20 bytes
  return t;
}

Scenario line(int n) {
  Scenario s;
  s.topology.layout = TopologyConfig::Layout::Explicit;
  for (int i = 0; i < n; ++i) s.topology.positions.push_back({{10.0 * i, 0}, std::nullopt});
  return s;
}

Scenario grid(int side) {
  Scenario s;
  s.topology.rows = s.topology.cols = side;
  return s;
}

const EnergyModel kModel;

}  // namespace

TEST(Simulator, EmptyTrafficSpendsOnlyIdle) {
  const auto r = run(grid(3));
  for (const auto& name : metric_names()) EXPECT_EQ(r.total(name), 0) << name;
  for (const auto& m : r.motes) EXPECT_EQ(m.spent, kModel.idle_cost(1000)) << "mote " << m.id;
}

TEST(Simulator, ReliableOneHopDelivered) {
  auto s = line(2);
  s.traffic.push_back(unicast(1, 10, 1, 0, Reliability::Reliable));
  const auto r = run(s);
  EXPECT_EQ(r.total("packets_sent"), 1);
  EXPECT_EQ(r.total("packets_delivered"), 1);
  EXPECT_EQ(r.total("packets_dropped"), 0);
  EXPECT_EQ(r.total("retransmissions"), 0);
  EXPECT_EQ(r.total("acks_sent"), 1);
}

TEST(Simulator, TwoLossesThenDelivery) {
  auto clean = line(2);
  clean.traffic.push_back(unicast(1, 10, 1, 0, Reliability::Reliable));
  auto lossy = clean;
  lossy.link_loss.push_back({1, 0, 2});
  const auto a = run(clean), b = run(lossy);
  EXPECT_EQ(b.total("packets_delivered"), 1);
  EXPECT_EQ(b.total("retransmissions"), 2);
  EXPECT_EQ(b.total("transmissions") - a.total("transmissions"), 2);
  // 20 payload + 8 tag + 8 header = 288 bits per attempt, each charged to the sender.
  EXPECT_EQ(b.motes[1].spent - a.motes[1].spent, 2 * kModel.tx_cost(288));
}

TEST(Simulator, EveryAttemptLostFailsAfterRetries) {
  auto s = line(2);
  s.traffic.push_back(unicast(1, 10, 1, 0, Reliability::Reliable));
  s.link_loss.push_back({1, 0, std::nullopt});
  const auto r = run(s);
  EXPECT_EQ(r.total("packets_delivered"), 0);
  EXPECT_EQ(r.total("packets_dropped"), 1);
  EXPECT_EQ(r.total("retransmissions"), 3);
  EXPECT_EQ(r.total("hop_failures"), 1);
  EXPECT_EQ(r.total("acks_sent"), 0);
}

TEST(Simulator, UnreliableLossIsNotRetried) {
  auto s = line(2);
  s.traffic.push_back(unicast(1, 10));
  s.link_loss.push_back({1, 0, std::nullopt});
  const auto r = run(s);
  EXPECT_EQ(r.total("retransmissions"), 0);
  EXPECT_EQ(r.total("packets_delivered"), 0);
}

TEST(Simulator, DeadMoteStopsAtZero) {
  auto s = line(2);
  s.topology.initial_energy_mj = 0.5;
  s.traffic.push_back(unicast(1, 10));
  const auto r = run(s);
  for (const auto& m : r.motes) {
    EXPECT_EQ(m.remaining, 0);
    EXPECT_FALSE(m.alive);
    EXPECT_EQ(m.spent, 500'000);
  }
}

TEST(Simulator, MultiHopTreeDelivery) {
  auto s = grid(5);
  for (MoteId m = 1; m < 25; ++m) s.traffic.push_back(unicast(m, 20 + m, 2, 100));
  const auto r = run(s);
  EXPECT_EQ(r.total("packets_sent"), 48);
  EXPECT_EQ(r.total("packets_delivered"), 48);
  EXPECT_EQ(r.total("mac_failures"), 0);
  EXPECT_TRUE(r.unreachable.empty());
  EXPECT_EQ(r.motes[24].tree_hops, 8);
}

TEST(Simulator, AodvAndDsrDelivery) {
  for (auto mode : {RoutingMode::Aodv, RoutingMode::Dsr}) {
    auto s = line(4);
    s.protocols.routing = mode;
    s.traffic.push_back(unicast(3, 10, 3, 50));
    s.traffic.push_back(unicast(0, 15, 1, 0, Reliability::Reliable, MoteId{3}));
    const auto r = run(s);
    EXPECT_EQ(r.total("packets_delivered"), 4) << to_string(mode);
    EXPECT_EQ(r.total("route_discoveries"), 2) << to_string(mode);
    EXPECT_GT(r.total("control_packets"), 0);
  }
}

TEST(Simulator, UnreachableSinkCounted) {
  auto s = line(2);
  s.topology.positions.push_back({{100, 0}, std::nullopt});
  s.traffic.push_back(unicast(2, 10));
  const auto r = run(s);
  EXPECT_EQ(r.unreachable, std::vector<MoteId>{2});
  EXPECT_EQ(r.total("route_failures"), 1);
  EXPECT_EQ(r.total("packets_dropped"), 1);
}

TEST(Simulator, OversizedSecuredPayloadRejectedAtValidation) {
  auto s = line(2);
  auto t = unicast(1, 10);
  t.payload = Bytes(60, 1);
  s.traffic.push_back(t);
  EXPECT_THROW(run(s), ValidationError);
  s.protocols.protection = ProtectionMode::None;
  EXPECT_EQ(run(s).total("packets_delivered"), 1);
}

TEST(Simulator, SpoofRejectedUnderAuthEncAcceptedWithoutProtection) {
  auto s = line(4);
  s.attackers.push_back({2, Spoof{}});
  s.traffic.push_back(unicast(3, 10, 5, 50));
  const auto secured = run(s);
  EXPECT_EQ(secured.total("altered_accepted"), 0);
  EXPECT_EQ(secured.total("altered_rejected"), 5);
  EXPECT_EQ(secured.total("packets_delivered"), 0);
  s.protocols.protection = ProtectionMode::None;
  const auto open = run(s);
  EXPECT_EQ(open.total("altered_accepted"), 5);
  s.protocols.protection = ProtectionMode::AuthOnly;
  EXPECT_EQ(run(s).total("altered_accepted"), 0);
}

TEST(Simulator, HandshakeChargesPresetCosts) {
  auto plain = line(3);
  auto hs = plain;
  hs.protocols.handshake = "ECC160";
  const auto a = run(plain), b = run(hs);
  EXPECT_EQ(b.motes[1].spent - a.motes[1].spent, mj_to_nj(22.3));
  EXPECT_EQ(b.motes[0].spent - a.motes[0].spent, 2 * mj_to_nj(22.3));
}

TEST(Simulator, EnergyConservation) {
  auto s = grid(4);
  s.attackers.push_back({5, HelloFlood{15, 40}});
  s.attackers.push_back({10, SelectiveForward{0.5}});
  for (MoteId m = 1; m < 16; ++m)
    if (m != 5 && m != 10) s.traffic.push_back(unicast(m, 5 * m, 3, 70, m % 2 ? Reliability::Reliable : Reliability::Unreliable));
  s.duration_ms = 1500;
  const auto r = run(s);
  for (const auto& m : r.motes) {
    EXPECT_EQ(m.spent, m.initial - m.remaining) << "mote " << m.id;
    Nanojoules binned = 0;
    for (auto e : r.mote_energy_bins[m.id]) binned += e;
    EXPECT_EQ(binned, m.spent) << "mote " << m.id;
  }
  for (const auto& [k, f] : r.flows) EXPECT_LE(f.delivered + f.dropped, f.sent);
  EXPECT_LE(r.total("packets_delivered") + r.total("packets_dropped"), r.total("packets_sent"));
}

TEST(Simulator, SameSeedSameReport) {
  auto s = grid(4);
  s.attackers.push_back({6, SelectiveForward{0.4}});
  for (MoteId m = 1; m < 16; ++m)
    if (m != 6) s.traffic.push_back(unicast(m, m, 4, 60));
  const auto a = run(s), b = run(s);
  EXPECT_EQ(a.totals, b.totals);
  EXPECT_EQ(a.mote_energy_bins, b.mote_energy_bins);
  EXPECT_EQ(a.global_bins, b.global_bins);
}

TEST(Simulator, BinsCoverDuration) {
  auto s = grid(2);
  s.duration_ms = 1050;
  s.metrics_bin_ms = 100;
  const auto r = run(s);
  EXPECT_EQ(r.global_bins.size(), 11u);
  EXPECT_EQ(r.mote_energy_bins[0].back(), kModel.idle_cost(50));
}

TEST(Mutesla, HonestBroadcastsAllAuthenticated) {
  auto s = grid(3);
  s.duration_ms = 5000;
  s.protocols.mutesla.enabled = true;
  TrafficCommand b;
  b.type = TrafficCommand::Type::Broadcast;
  b.at_ms = 100;
  b.count = 4;
  b.interval_ms = 600;
  b.payload = to_bytes("cmd");
  s.traffic.push_back(b);
  const auto r = run(s);
  EXPECT_EQ(r.total("broadcasts_sent"), 4);
  EXPECT_EQ(r.total("broadcasts_discarded"), 0);
  EXPECT_EQ(r.total("broadcasts_buffered"), 4 * 8);
  EXPECT_EQ(r.total("broadcasts_authenticated"), 4 * 8);
  EXPECT_EQ(r.total("broadcast_forgeries_accepted"), 0);
}

TEST(Mutesla, SpoofedBroadcastNeverAuthenticated) {
  auto s = line(4);
  s.duration_ms = 3000;
  s.protocols.mutesla.enabled = true;
  s.attackers.push_back({1, Spoof{}});
  TrafficCommand b;
  b.type = TrafficCommand::Type::Broadcast;
  b.at_ms = 10;
  b.payload = to_bytes("cmd");
  s.traffic.push_back(b);
  const auto r = run(s);
  EXPECT_EQ(r.total("broadcast_forgeries_accepted"), 0);
  EXPECT_EQ(r.total("broadcasts_authenticated"), 0);
  EXPECT_EQ(r.total("broadcast_mac_failures"), 2);
}

TEST(Sinkhole, AttractsAtLeastTwiceBaselineShare) {
  auto s = grid(5);
  for (MoteId m = 1; m < 25; ++m)
    if (m != 12) s.traffic.push_back(unicast(m, 20 + m));
  auto attacked = s;
  attacked.attackers.push_back({12, Sinkhole{}});

  const auto net = build_topology(s.topology);
  const auto tree = beacon_tree_route(net, 0);
  int through = 0;
  for (MoteId m = 1; m < 25; ++m) {
    if (m == 12) continue;
    const auto p = tree.path_to_root(m);
    through += std::count(p.begin() + 1, p.end(), MoteId{12});
  }
  const double oracle_share = through / 23.0;
  const auto base = run(s);
  EXPECT_EQ(base.motes[12].transit_packets, through);
  const auto r = run(attacked);
  const double share = static_cast<double>(r.motes[12].transit_packets) / 23.0;
  EXPECT_GE(share, 2 * oracle_share);
}

TEST(Wormhole, TunnelCostsNoRadioEnergy) {
  Scenario s;
  s.topology.layout = TopologyConfig::Layout::Explicit;
  s.topology.positions = {{{0, 0}, std::nullopt}, {{10, 0}, std::nullopt}, {{100, 0}, std::nullopt}, {{110, 0}, std::nullopt}};
  s.attackers = {{1, Wormhole{2, 1}}, {2, Wormhole{1, 1}}};
  s.traffic.push_back(unicast(3, 50));
  const auto r = run(s);
  EXPECT_EQ(r.total("packets_delivered"), 1);
  EXPECT_GT(r.total("tunnel_transfers"), 0);
  // Far end: its own beacon tx, mote 3's beacon rx and the data rx; nothing for the tunnel.
  const Nanojoules expect = kModel.tx_cost(104) + kModel.rx_cost(104) + kModel.rx_cost(288) + kModel.idle_cost(1000);
  EXPECT_EQ(r.motes[2].spent, expect);
}
