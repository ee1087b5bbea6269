#pragma once

// Payload codecs for control traffic: route discovery messages, beacons and
// hellos. Layouts (all integers big-endian):
//
//   AODV RREQ / RREP : type(1) origin(2) target(2) request_id(4) dest_seq(4) hop_count(1)   = 14 bytes
//   DSR  RREQ / RREP : type(1) origin(2) target(2) request_id(4) n(1) record(2n)            = 10 + 2n
//   DSR  RERR        : type(1) origin(2) target(2) broken_from(2) broken_to(2)              = 9 bytes
//   Beacon           : root(2) hop_count(1) epoch(2)                                        = 5 bytes
//   Hello            : claimed_id(2) sequence(2)                                            = 4 bytes

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "wsn/wire.hpp"

namespace wsn {

enum class RouteVariant { Aodv, Dsr };

inline const char* to_string(RouteVariant v) { return v == RouteVariant::Aodv ? "AODV" : "DSR"; }

enum class RouteMsgType : std::uint8_t {
  AodvRequest = 0x01,
  AodvReply = 0x02,
  DsrRequest = 0x11,
  DsrReply = 0x12,
  DsrError = 0x13,
};

struct RouteRequest {
  RouteVariant variant = RouteVariant::Aodv;
  MoteId origin = 0;
  MoteId target = 0;
  std::uint32_t request_id = 0;
  std::uint32_t dest_seq_no = 0;  // aodv
  std::uint8_t hop_count = 0;     // aodv
  std::vector<MoteId> route_record;  // dsr

  friend bool operator==(const RouteRequest&, const RouteRequest&) = default;
};

struct RouteReply {
  RouteVariant variant = RouteVariant::Aodv;
  MoteId origin = 0;
  MoteId target = 0;
  std::uint32_t request_id = 0;
  std::uint32_t dest_seq_no = 0;  // aodv
  std::uint8_t hop_count = 0;     // aodv: hops from the replier's claimed position to target
  std::vector<MoteId> route_record;  // dsr: complete origin..target route

  friend bool operator==(const RouteReply&, const RouteReply&) = default;
};

struct RouteErrorMsg {
  MoteId origin = 0;
  MoteId target = 0;
  MoteId broken_from = 0;
  MoteId broken_to = 0;

  friend bool operator==(const RouteErrorMsg&, const RouteErrorMsg&) = default;
};

using RouteMessage = std::variant<RouteRequest, RouteReply, RouteErrorMsg>;

namespace detail {

template <class Msg>
Bytes encode_discovery(const Msg& m, bool is_request) {
  ByteWriter w;
  if (m.variant == RouteVariant::Aodv) {
    w.u8(static_cast<std::uint8_t>(is_request ? RouteMsgType::AodvRequest : RouteMsgType::AodvReply));
  } else {
    w.u8(static_cast<std::uint8_t>(is_request ? RouteMsgType::DsrRequest : RouteMsgType::DsrReply));
  }
  w.u16(m.origin);
  w.u16(m.target);
  w.u32(m.request_id);
  if (m.variant == RouteVariant::Aodv) {
    w.u32(m.dest_seq_no);
    w.u8(m.hop_count);
  } else {
    if (m.route_record.size() > 27) throw std::length_error("DSR route record exceeds 27 entries");
    w.u8(static_cast<std::uint8_t>(m.route_record.size()));
    for (MoteId id : m.route_record) w.u16(id);
  }
  return w.take();
}

template <class Msg>
std::optional<Msg> decode_discovery(ByteReader& r, RouteVariant variant) {
  Msg m;
  m.variant = variant;
  if (!r.u16(m.origin) || !r.u16(m.target) || !r.u32(m.request_id)) return std::nullopt;
  if (variant == RouteVariant::Aodv) {
    if (!r.u32(m.dest_seq_no) || !r.u8(m.hop_count)) return std::nullopt;
  } else {
    std::uint8_t n = 0;
    if (!r.u8(n)) return std::nullopt;
    m.route_record.resize(n);
    for (auto& id : m.route_record)
      if (!r.u16(id)) return std::nullopt;
  }
  if (!r.done()) return std::nullopt;
  return m;
}

}  // namespace detail

inline Bytes encode_route_message(const RouteMessage& msg) {
  return std::visit(
      [](const auto& m) -> Bytes {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, RouteRequest>) {
          return detail::encode_discovery(m, true);
        } else if constexpr (std::is_same_v<T, RouteReply>) {
          return detail::encode_discovery(m, false);
        } else {
          ByteWriter w;
          w.u8(static_cast<std::uint8_t>(RouteMsgType::DsrError));
          w.u16(m.origin);
          w.u16(m.target);
          w.u16(m.broken_from);
          w.u16(m.broken_to);
          return w.take();
        }
      },
      msg);
}

inline std::optional<RouteMessage> decode_route_message(ByteView payload) {
  ByteReader r(payload);
  std::uint8_t type = 0;
  if (!r.u8(type)) return std::nullopt;
  switch (static_cast<RouteMsgType>(type)) {
    case RouteMsgType::AodvRequest:
      if (auto m = detail::decode_discovery<RouteRequest>(r, RouteVariant::Aodv)) return *m;
      return std::nullopt;
    case RouteMsgType::AodvReply:
      if (auto m = detail::decode_discovery<RouteReply>(r, RouteVariant::Aodv)) return *m;
      return std::nullopt;
    case RouteMsgType::DsrRequest:
      if (auto m = detail::decode_discovery<RouteRequest>(r, RouteVariant::Dsr)) return *m;
      return std::nullopt;
    case RouteMsgType::DsrReply:
      if (auto m = detail::decode_discovery<RouteReply>(r, RouteVariant::Dsr)) return *m;
      return std::nullopt;
    case RouteMsgType::DsrError: {
      RouteErrorMsg e;
      if (!r.u16(e.origin) || !r.u16(e.target) || !r.u16(e.broken_from) || !r.u16(e.broken_to) || !r.done())
        return std::nullopt;
      return e;
    }
  }
  return std::nullopt;
}

struct Beacon {
  MoteId root = 0;
  std::uint8_t hop_count = 0;
  std::uint16_t epoch = 0;

  [[nodiscard]] Bytes encode() const {
    ByteWriter w;
    w.u16(root);
    w.u8(hop_count);
    w.u16(epoch);
    return w.take();
  }
  static std::optional<Beacon> decode(ByteView payload) {
    ByteReader r(payload);
    Beacon b;
    if (!r.u16(b.root) || !r.u8(b.hop_count) || !r.u16(b.epoch) || !r.done()) return std::nullopt;
    return b;
  }
  friend bool operator==(const Beacon&, const Beacon&) = default;
};

struct Hello {
  MoteId claimed_id = 0;
  std::uint16_t sequence = 0;

  [[nodiscard]] Bytes encode() const {
    ByteWriter w;
    w.u16(claimed_id);
    w.u16(sequence);
    return w.take();
  }
  static std::optional<Hello> decode(ByteView payload) {
    ByteReader r(payload);
    Hello h;
    if (!r.u16(h.claimed_id) || !r.u16(h.sequence) || !r.done()) return std::nullopt;
    return h;
  }
};

}  // namespace wsn
