#include <gtest/gtest.h>

#include "wsn/routing.hpp"
#include "wsn/simulator.hpp"

using namespace wsn;

namespace {

WirePacket data_packet(std::string body) {
  WirePacket p;
  p.src = 3;
  p.dst = 0;
  p.kind = PacketKind::Data;
  p.payload = to_bytes(body);
  return p;
}

Network grid(int side) {
  TopologyConfig c;
  c.rows = c.cols = side;
  return build_topology(c);
}

Scenario grid_scenario(int side) {
  Scenario s;
  s.topology.rows = s.topology.cols = side;
  s.duration_ms = 1000;
  return s;
}

}  // namespace

TEST(SelectiveForward, EndpointsAreExact) {
  Rng rng(1);
  const BehaviorContext ctx{5, &rng, 0};
  int dropped0 = 0, dropped1 = 0;
  for (int i = 0; i < 1000; ++i) {
    dropped0 += std::holds_alternative<action::Drop>(apply_behavior(SelectiveForward{0.0}, data_packet("x"), ctx));
    dropped1 += std::holds_alternative<action::Drop>(apply_behavior(SelectiveForward{1.0}, data_packet("x"), ctx));
  }
  EXPECT_EQ(dropped0, 0);
  EXPECT_EQ(dropped1, 1000);
}

TEST(SelectiveForward, SeededAndRoughlyCalibrated) {
  auto run = [](std::uint64_t seed) {
    Rng rng = Rng::stream(seed, 7);
    const BehaviorContext ctx{5, &rng, 0};
    std::vector<bool> drops;
    for (int i = 0; i < 2000; ++i)
      drops.push_back(std::holds_alternative<action::Drop>(apply_behavior(SelectiveForward{0.3}, data_packet("x"), ctx)));
    return drops;
  };
  const auto a = run(9), b = run(9);
  EXPECT_EQ(a, b);
  const auto n = std::count(a.begin(), a.end(), true);
  EXPECT_NEAR(static_cast<double>(n) / 2000, 0.3, 0.04);
}

TEST(SelectiveForward, ControlTrafficPasses) {
  WirePacket beacon;
  beacon.kind = PacketKind::Beacon;
  beacon.payload = Beacon{0, 1, 0}.encode();
  EXPECT_TRUE(std::holds_alternative<action::Forward>(apply_behavior(SelectiveForward{1.0}, beacon, {})));
}

TEST(Spoof, FlipsTailBitsOnly) {
  const auto in = data_packet("abc");
  const auto out = apply_behavior(Spoof{}, in, {});
  const auto* m = std::get_if<action::Modify>(&out);
  ASSERT_TRUE(m);
  EXPECT_EQ(m->packet.src, in.src);
  EXPECT_EQ(m->packet.dst, in.dst);
  EXPECT_EQ(m->packet.payload, to_bytes("abb"));
  Spoof replace{Spoof::Policy::Replace, 1, to_bytes("zz")};
  EXPECT_EQ(std::get<action::Modify>(apply_behavior(replace, in, {})).packet.payload, to_bytes("zz"));
}

TEST(Wormhole, TunnelsEverything) {
  const auto out = apply_behavior(Wormhole{18, 3}, data_packet("x"), {});
  const auto* t = std::get_if<action::Tunnel>(&out);
  ASSERT_TRUE(t);
  EXPECT_EQ(t->peer, 18u);
  EXPECT_EQ(t->latency_ms, 3);
}

TEST(Sinkhole, AdvertisesForgedHopCount) {
  WirePacket b;
  b.kind = PacketKind::Beacon;
  b.payload = Beacon{0, 4, 1}.encode();
  const auto out = apply_behavior(Sinkhole{}, b, {});
  EXPECT_EQ(Beacon::decode(std::get<action::Modify>(out).packet.payload)->hop_count, 0);

  WirePacket rep;
  rep.kind = PacketKind::RouteCtl;
  rep.payload = encode_route_message(RouteReply{RouteVariant::Aodv, 1, 2, 3, 10, 4, {}});
  const auto r = std::get<RouteReply>(*decode_route_message(std::get<action::Modify>(apply_behavior(Sinkhole{}, rep, {})).packet.payload));
  EXPECT_EQ(r.dest_seq_no, 110u);
  EXPECT_EQ(r.hop_count, 0);
}

TEST(FieldModify, Targets) {
  WirePacket rep;
  rep.kind = PacketKind::RouteCtl;
  rep.payload = encode_route_message(RouteReply{RouteVariant::Aodv, 1, 2, 3, 10, 4, {}});
  auto decoded = [](const Action& a) {
    return std::get<RouteReply>(*decode_route_message(std::get<action::Modify>(a).packet.payload));
  };
  EXPECT_EQ(decoded(apply_behavior(FieldModify{RouteField::SeqNo, 50}, rep, {})).dest_seq_no, 60u);
  EXPECT_EQ(decoded(apply_behavior(FieldModify{RouteField::HopCount, 0}, rep, {})).hop_count, 0);

  WirePacket rq;
  rq.kind = PacketKind::RouteCtl;
  rq.payload = encode_route_message(RouteRequest{RouteVariant::Dsr, 0, 9, 1, 0, 0, {0, 1, 2, 3}});
  BehaviorContext ctx{7, nullptr, 0};
  const auto out = apply_behavior(FieldModify{RouteField::SourceRoute, 0}, rq, ctx);
  EXPECT_EQ(std::get<RouteRequest>(*decode_route_message(std::get<action::Modify>(out).packet.payload)).route_record,
            (std::vector<MoteId>{0, 7}));
}

TEST(Sybil, IdentityCount) {
  EXPECT_THROW(sybil_identities(Sybil{1, {}}, 4, 9), AdversaryError);
  const auto two = sybil_identities(Sybil{2, {}}, 4, 9);
  ASSERT_EQ(two.size(), 2u);
  EXPECT_NE(two[0], two[1]);
  for (MoteId id : two) EXPECT_GE(id, 9u);
  const auto victims = sybil_identities(Sybil{3, {2, 6}}, 4, 9);
  EXPECT_EQ(victims[0], 2u);
  EXPECT_EQ(victims[1], 6u);
  EXPECT_GE(victims[2], 9u);
}

TEST(HelloFlood, OnePacketPerMoteInRange) {
  const auto net = grid(3);
  EXPECT_TRUE(hello_flood(HelloFlood{0, 50}, net, 4, 0).empty());
  const auto pkts = hello_flood(HelloFlood{100, 50}, net, 4, 100);
  EXPECT_EQ(pkts.size(), 8u);
  for (const auto& p : pkts) {
    EXPECT_EQ(p.kind, PacketKind::Hello);
    EXPECT_NE(p.dst, 4u);
    EXPECT_EQ(Hello::decode(p.payload)->sequence, 2);
  }
}

TEST(Wormhole, AttractsAodvRoute) {
  const auto net = grid(5);
  AttackerSet atk(net, {{6, Wormhole{18, 1}}, {18, Wormhole{6, 1}}});
  EXPECT_EQ(net.hop_distances(5)[13], 4);
  const auto r = aodv_discover(net, 13, 5, atk);
  ASSERT_TRUE(r.route);
  EXPECT_LE(r.route->hop_count, 2);
  EXPECT_TRUE(route_corrupted(net, *r.route, 13, atk.physical_ids()));
}

TEST(SybilSim, NeighborTablesGrowByK) {
  for (int k : {2, 5}) {
    auto honest = grid_scenario(3);
    honest.traffic.push_back({TrafficCommand::Type::Unicast, 10, 8, std::nullopt, Reliability::Unreliable, to_bytes("r"), 1, 0});
    auto attacked = honest;
    attacked.attackers.push_back({1, Sybil{k, {}}});
    const auto base = run(honest);
    const auto rep = run(attacked);
    EXPECT_EQ(rep.motes[4].neighbor_table_size, base.motes[4].neighbor_table_size + k) << "k=" << k;
    for (MoteId n : {0, 2}) EXPECT_EQ(rep.motes[n].neighbor_table_size, base.motes[n].neighbor_table_size + k);
    EXPECT_EQ(rep.total("sybil_announcements"), k);
  }
}

TEST(HelloFloodSim, TwentyHellosPerMoteAndMoreEnergy) {
  auto honest = grid_scenario(3);
  auto attacked = honest;
  attacked.attackers.push_back({4, HelloFlood{100, 50}});
  const auto base = run(honest);
  const auto rep = run(attacked);
  for (MoteId m = 0; m < 9; ++m) {
    if (m == 4) continue;
    EXPECT_EQ(rep.motes[m].hellos_received, 20) << "mote " << m;
    EXPECT_GT(rep.motes[m].spent, base.motes[m].spent) << "mote " << m;
  }
  EXPECT_GT(rep.energy_spent(), base.energy_spent());
}

TEST(SelectiveForwardSim, ZeroProbabilityIsTransparent) {
  auto honest = grid_scenario(3);
  honest.traffic.push_back({TrafficCommand::Type::Unicast, 10, 8, std::nullopt, Reliability::Unreliable, to_bytes("r"), 10, 50});
  auto attacked = honest;
  attacked.attackers.push_back({5, SelectiveForward{0.0}});
  const auto a = run(honest), b = run(attacked);
  EXPECT_EQ(a.totals, b.totals);
  EXPECT_EQ(a.mote_energy_bins, b.mote_energy_bins);
}

TEST(SelectiveForwardSim, BlackHoleDropsEverything) {
  auto s = grid_scenario(3);
  // Start after the beacon tree has reached mote 8.
  s.traffic.push_back({TrafficCommand::Type::Unicast, 100, 8, std::nullopt, Reliability::Unreliable, to_bytes("r"), 10, 50});
  s.attackers.push_back({5, SelectiveForward{1.0}});
  const auto r = run(s);
  EXPECT_EQ(r.total("packets_delivered"), 0);
  EXPECT_EQ(r.total("attack_drops"), 10);
}
