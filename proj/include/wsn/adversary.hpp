#pragma once

// Attacker behaviors applied at malicious motes as packet-handling policies.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "wsn/control.hpp"
#include "wsn/mutesla.hpp"
#include "wsn/rng.hpp"
#include "wsn/topology.hpp"
#include "wsn/wire.hpp"

namespace wsn {

/// Masquerade as a network node: alter payloads in transit, and answer route
/// requests in the target's name.
struct Spoof {
  enum class Policy { FlipBits, Replace };
  Policy policy = Policy::FlipBits;
  int flip_bits = 1;     // lowest bits of the last payload byte
  Bytes replacement;     // Replace
};

/// Drops each transiting data or probe packet with probability drop_prob;
/// drop_prob = 1 is a black hole.
struct SelectiveForward {
  double drop_prob = 0;
};

/// Forges attractive routing metrics to pull traffic through itself.
struct Sinkhole {
  int advertised_hop_count = 0;
  int advertised_seq_bump = 100;
};

/// One end of an out-of-band tunnel. The pair behaves as a single virtual
/// node: whatever one end hears is re-emitted by the other.
struct Wormhole {
  MoteId peer = 0;
  SimTime tunnel_latency_ms = 1;
};

/// Presents several identities to its radio neighborhood.
struct Sybil {
  int identity_count = 2;
  std::vector<MoteId> victim_ids;  // used first; fresh ids fill the rest
};

/// High-power hello broadcasts that drain receivers' batteries.
struct HelloFlood {
  double boosted_range = 0;
  SimTime period_ms = 50;
};

enum class RouteField { SeqNo, HopCount, SourceRoute };

inline const char* to_string(RouteField f) {
  switch (f) {
    case RouteField::SeqNo: return "SeqNo";
    case RouteField::HopCount: return "HopCount";
    case RouteField::SourceRoute: return "SourceRoute";
  }
  return "?";
}

/// Rewrites one routing field of transiting control traffic.
struct FieldModify {
  RouteField target = RouteField::SeqNo;
  int seq_bump = 100;
};

using AttackerBehavior = std::variant<Spoof, SelectiveForward, Sinkhole, Wormhole, Sybil, HelloFlood, FieldModify>;

inline const char* behavior_name(const AttackerBehavior& b) {
  constexpr const char* names[] = {"spoof", "selective_forward", "sinkhole", "wormhole", "sybil", "hello_flood", "field_modify"};
  return names[b.index()];
}

class AdversaryError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

namespace action {
struct Forward {
  WirePacket packet;
};
struct Drop {};
struct Modify {
  WirePacket packet;
};
struct Tunnel {
  MoteId peer = 0;
  WirePacket packet;
  SimTime latency_ms = 1;
};
}  // namespace action

using Action = std::variant<action::Forward, action::Drop, action::Modify, action::Tunnel>;

struct BehaviorContext {
  MoteId self = 0;
  Rng* rng = nullptr;       // per-attacker stream; required for SelectiveForward
  std::uint32_t known_dest_seq = 0;
};

inline bool carries_payload(PacketKind k) { return k == PacketKind::Data || k == PacketKind::Probe; }

/// Spoof alteration of a payload.
inline Bytes spoof_payload(const Spoof& s, Bytes payload) {
  if (s.policy == Spoof::Policy::Replace) return s.replacement;
  if (payload.empty()) return payload;
  const int bits = std::clamp(s.flip_bits, 1, 8);
  payload.back() ^= static_cast<std::uint8_t>((1u << bits) - 1u);
  return payload;
}

namespace detail {

inline std::optional<WirePacket> rewrite_route_ctl(const WirePacket& p, const std::function<bool(RouteMessage&)>& edit) {
  auto msg = decode_route_message(p.payload);
  if (!msg || !edit(*msg)) return std::nullopt;
  WirePacket out = p;
  out.payload = encode_route_message(*msg);
  return out;
}

inline std::uint8_t clamp_hops(int h) { return static_cast<std::uint8_t>(std::clamp(h, 0, 255)); }

}  // namespace detail

/// Decides what a malicious mote does with a packet that transits it.
inline Action apply_behavior(const AttackerBehavior& behavior, const WirePacket& packet, const BehaviorContext& ctx) {
  return std::visit(
      [&](const auto& b) -> Action {
        using B = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<B, Spoof>) {
          if (!carries_payload(packet.kind) || packet.payload.empty()) return action::Forward{packet};
          WirePacket altered = packet;
          altered.payload = spoof_payload(b, packet.payload);
          return action::Modify{altered};
        } else if constexpr (std::is_same_v<B, SelectiveForward>) {
          if (!carries_payload(packet.kind)) return action::Forward{packet};
          if (b.drop_prob >= 1.0) return action::Drop{};
          if (b.drop_prob <= 0.0) return action::Forward{packet};
          if (ctx.rng == nullptr) throw AdversaryError("selective forwarding needs a random stream");
          return ctx.rng->bernoulli(b.drop_prob) ? Action{action::Drop{}} : Action{action::Forward{packet}};
        } else if constexpr (std::is_same_v<B, Sinkhole>) {
          if (packet.kind == PacketKind::Beacon) {
            if (auto beacon = Beacon::decode(packet.payload)) {
              WirePacket out = packet;
              beacon->hop_count = detail::clamp_hops(b.advertised_hop_count);
              out.payload = beacon->encode();
              return action::Modify{out};
            }
          }
          if (packet.kind != PacketKind::RouteCtl) return action::Forward{packet};
          auto out = detail::rewrite_route_ctl(packet, [&](RouteMessage& m) {
            if (auto* rep = std::get_if<RouteReply>(&m); rep && rep->variant == RouteVariant::Aodv) {
              rep->dest_seq_no += static_cast<std::uint32_t>(b.advertised_seq_bump);
              rep->hop_count = detail::clamp_hops(b.advertised_hop_count);
              return true;
            }
            return false;
          });
          return out ? Action{action::Modify{*out}} : Action{action::Forward{packet}};
        } else if constexpr (std::is_same_v<B, Wormhole>) {
          return action::Tunnel{b.peer, packet, b.tunnel_latency_ms};
        } else if constexpr (std::is_same_v<B, FieldModify>) {
          if (packet.kind == PacketKind::Beacon && b.target == RouteField::HopCount) {
            if (auto beacon = Beacon::decode(packet.payload)) {
              WirePacket out = packet;
              beacon->hop_count = 0;
              out.payload = beacon->encode();
              return action::Modify{out};
            }
          }
          if (packet.kind != PacketKind::RouteCtl) return action::Forward{packet};
          auto out = detail::rewrite_route_ctl(packet, [&](RouteMessage& m) {
            if (auto* rep = std::get_if<RouteReply>(&m); rep && rep->variant == RouteVariant::Aodv) {
              if (b.target == RouteField::SeqNo) rep->dest_seq_no += static_cast<std::uint32_t>(b.seq_bump);
              else if (b.target == RouteField::HopCount) rep->hop_count = 0;
              else return false;
              return true;
            }
            if (auto* req = std::get_if<RouteRequest>(&m); req && req->variant == RouteVariant::Dsr) {
              if (b.target != RouteField::SourceRoute || req->route_record.empty()) return false;
              req->route_record = {req->route_record.front(), ctx.self};
              return true;
            }
            return false;
          });
          return out ? Action{action::Modify{*out}} : Action{action::Forward{packet}};
        } else {
          // Sybil and HelloFlood act by emitting traffic, not by handling it.
          return action::Forward{packet};
        }
      },
      behavior);
}

/// Identities a Sybil attacker answers for: configured victims first, then
/// fresh ids outside the deployed id range.
inline std::vector<MoteId> sybil_identities(const Sybil& s, MoteId attacker, std::size_t network_size) {
  if (s.identity_count < 2) throw AdversaryError("InvalidCount: Sybil identity_count must be >= 2");
  std::vector<MoteId> ids;
  std::set<MoteId> used;
  for (MoteId v : s.victim_ids) {
    if (static_cast<int>(ids.size()) == s.identity_count) break;
    if (used.insert(v).second) ids.push_back(v);
  }
  // Fresh ids live in a per-attacker block above the deployed range.
  MoteId next = static_cast<MoteId>(std::max<std::size_t>(network_size, 1000) + 64u * attacker);
  while (static_cast<int>(ids.size()) < s.identity_count) {
    if (!used.contains(next)) {
      ids.push_back(next);
      used.insert(next);
    }
    ++next;
  }
  return ids;
}

/// One flood period's worth of hello packets: one per mote within the
/// boosted range.
inline std::vector<WirePacket> hello_flood(const HelloFlood& h, const Network& net, MoteId attacker, SimTime now) {
  std::vector<WirePacket> out;
  if (h.boosted_range <= 0) return out;
  const auto seq = static_cast<std::uint16_t>(h.period_ms > 0 ? now / h.period_ms : 0);
  for (MoteId target : net.within(attacker, h.boosted_range)) {
    WirePacket p;
    p.src = attacker;
    p.dst = target;
    p.kind = PacketKind::Hello;
    p.hop_ttl = 1;
    p.payload = Hello{attacker, seq}.encode();
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace wsn
