#include <gtest/gtest.h>

#include "wsn/control.hpp"

using namespace wsn;

TEST(WirePacket, HeaderIsEightBytes) {
  WirePacket p;
  p.src = 0x0102;
  p.dst = 0x0304;
  p.kind = PacketKind::Probe;
  p.reliability = Reliability::Reliable;
  p.ack = true;
  p.hop_ttl = 9;
  p.payload = to_bytes("abc");
  const auto w = p.encode();
  ASSERT_EQ(w.size(), 11u);
  EXPECT_EQ(w[0], 0x01);
  EXPECT_EQ(w[3], 0x04);
  EXPECT_EQ(w[4], 3);
  EXPECT_EQ(w[5], 3);
  EXPECT_EQ(w[6], 9);
  EXPECT_EQ(w[7], 3);
  EXPECT_EQ(p.on_air_bits(), 88);
  EXPECT_EQ(WirePacket::decode(w), p);
}

TEST(WirePacket, RejectsOversizeAndMalformed) {
  WirePacket p;
  p.payload = Bytes(65, 0);
  EXPECT_THROW(p.encode(), std::length_error);
  p.payload = Bytes(64, 0);
  auto w = p.encode();
  EXPECT_TRUE(WirePacket::decode(w));
  w.pop_back();
  EXPECT_FALSE(WirePacket::decode(w));
  EXPECT_FALSE(WirePacket::decode(Bytes(7, 0)));
  Bytes bad_kind = WirePacket{}.encode();
  bad_kind[4] = 9;
  EXPECT_FALSE(WirePacket::decode(bad_kind));
}

TEST(RouteControl, AodvLayout) {
  RouteRequest rq{RouteVariant::Aodv, 1, 2, 77, 5, 3, {}};
  const auto w = encode_route_message(rq);
  EXPECT_EQ(w.size(), 14u);
  EXPECT_EQ(w[0], 0x01);
  EXPECT_EQ(std::get<RouteRequest>(*decode_route_message(w)), rq);
  RouteReply rp{RouteVariant::Aodv, 1, 2, 77, 6, 2, {}};
  EXPECT_EQ(encode_route_message(rp)[0], 0x02);
  EXPECT_EQ(std::get<RouteReply>(*decode_route_message(encode_route_message(rp))), rp);
}

TEST(RouteControl, DsrLayout) {
  RouteReply rp{RouteVariant::Dsr, 0, 3, 4, 0, 0, {0, 1, 2, 3}};
  const auto w = encode_route_message(rp);
  EXPECT_EQ(w.size(), 18u);
  EXPECT_EQ(w[0], 0x12);
  EXPECT_EQ(std::get<RouteReply>(*decode_route_message(w)), rp);
  RouteRequest rq{RouteVariant::Dsr, 0, 3, 4, 0, 0, std::vector<MoteId>(28, 1)};
  EXPECT_THROW(encode_route_message(rq), std::length_error);
  rq.route_record.resize(27);
  EXPECT_EQ(encode_route_message(rq).size(), 64u);
}

TEST(RouteControl, ErrorLayout) {
  RouteErrorMsg e{0, 5, 2, 3};
  const auto w = encode_route_message(e);
  EXPECT_EQ(w.size(), 9u);
  EXPECT_EQ(std::get<RouteErrorMsg>(*decode_route_message(w)), e);
}

TEST(RouteControl, RejectsTruncatedAndTrailing) {
  auto w = encode_route_message(RouteRequest{RouteVariant::Aodv, 1, 2, 3, 4, 5, {}});
  auto trailing = w;
  trailing.push_back(0);
  EXPECT_FALSE(decode_route_message(trailing));
  w.pop_back();
  EXPECT_FALSE(decode_route_message(w));
  EXPECT_FALSE(decode_route_message(Bytes{0x7f}));
  EXPECT_FALSE(decode_route_message(Bytes{}));
}

TEST(BeaconHello, Layouts) {
  const Beacon b{0, 3, 7};
  EXPECT_EQ(b.encode().size(), 5u);
  EXPECT_EQ(Beacon::decode(b.encode()), b);
  const Hello h{12, 4};
  const auto hw = h.encode();
  EXPECT_EQ(hw.size(), 4u);
  const auto hb = Hello::decode(hw);
  ASSERT_TRUE(hb);
  EXPECT_EQ(hb->claimed_id, 12);
  EXPECT_EQ(hb->sequence, 4);
}
