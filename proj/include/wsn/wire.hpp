#pragma once

// On-air packet format. Header is 8 bytes:
//   src(2, BE) dst(2, BE) kind(1) flags(1) ttl(1) length(1)
// flags: bit0 = reliable, bit1 = link-layer acknowledgement.

#include <cstdint>
#include <optional>
#include <string_view>

#include "wsn/crypto.hpp"
#include "wsn/snep.hpp"

namespace wsn {

inline constexpr MoteId kBroadcastId = 0xFFFF;

enum class PacketKind : std::uint8_t { Data = 0, RouteCtl = 1, Beacon = 2, Probe = 3, KeyDisclosure = 4, Hello = 5 };

inline const char* to_string(PacketKind k) {
  switch (k) {
    case PacketKind::Data: return "Data";
    case PacketKind::RouteCtl: return "RouteCtl";
    case PacketKind::Beacon: return "Beacon";
    case PacketKind::Probe: return "Probe";
    case PacketKind::KeyDisclosure: return "KeyDisclosure";
    case PacketKind::Hello: return "Hello";
  }
  return "?";
}

enum class Reliability : std::uint8_t { Unreliable = 0, Reliable = 1 };

struct WirePacket {
  static constexpr std::size_t kHeaderBytes = 8;
  static constexpr std::size_t kMaxPayload = 64;

  MoteId src = 0;
  MoteId dst = kBroadcastId;
  PacketKind kind = PacketKind::Data;
  Reliability reliability = Reliability::Unreliable;
  bool ack = false;
  std::uint8_t hop_ttl = 32;
  Bytes payload;

  [[nodiscard]] std::int64_t on_air_bits() const {
    return 8 * static_cast<std::int64_t>(kHeaderBytes + payload.size());
  }

  [[nodiscard]] Bytes encode() const {
    if (payload.size() > kMaxPayload) throw std::length_error("wire payload exceeds 64 bytes");
    Bytes out;
    out.reserve(kHeaderBytes + payload.size());
    out.push_back(static_cast<std::uint8_t>(src >> 8));
    out.push_back(static_cast<std::uint8_t>(src));
    out.push_back(static_cast<std::uint8_t>(dst >> 8));
    out.push_back(static_cast<std::uint8_t>(dst));
    out.push_back(static_cast<std::uint8_t>(kind));
    out.push_back(static_cast<std::uint8_t>((reliability == Reliability::Reliable ? 1 : 0) | (ack ? 2 : 0)));
    out.push_back(hop_ttl);
    out.push_back(static_cast<std::uint8_t>(payload.size()));
    out.insert(out.end(), payload.begin(), payload.end());
    return out;
  }

  static std::optional<WirePacket> decode(ByteView wire) {
    if (wire.size() < kHeaderBytes) return std::nullopt;
    if (wire[4] > static_cast<std::uint8_t>(PacketKind::Hello)) return std::nullopt;
    const std::size_t len = wire[7];
    if (len > kMaxPayload || wire.size() != kHeaderBytes + len) return std::nullopt;
    WirePacket p;
    p.src = static_cast<MoteId>((wire[0] << 8) | wire[1]);
    p.dst = static_cast<MoteId>((wire[2] << 8) | wire[3]);
    p.kind = static_cast<PacketKind>(wire[4]);
    p.reliability = (wire[5] & 1) ? Reliability::Reliable : Reliability::Unreliable;
    p.ack = (wire[5] & 2) != 0;
    p.hop_ttl = wire[6];
    p.payload.assign(wire.begin() + kHeaderBytes, wire.end());
    return p;
  }

  friend bool operator==(const WirePacket&, const WirePacket&) = default;
};

/// Big-endian helpers shared by the payload codecs.
class ByteWriter {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u16(std::uint16_t v) {
    out_.push_back(static_cast<std::uint8_t>(v >> 8));
    out_.push_back(static_cast<std::uint8_t>(v));
  }
  void u32(std::uint32_t v) {
    for (int s = 24; s >= 0; s -= 8) out_.push_back(static_cast<std::uint8_t>(v >> s));
  }
  void bytes(ByteView b) { out_.insert(out_.end(), b.begin(), b.end()); }
  Bytes take() { return std::move(out_); }

 private:
  Bytes out_;
};

class ByteReader {
 public:
  explicit ByteReader(ByteView in) : in_(in) {}
  bool u8(std::uint8_t& v) {
    if (!need(1)) return false;
    v = in_[pos_++];
    return true;
  }
  bool u16(std::uint16_t& v) {
    if (!need(2)) return false;
    v = static_cast<std::uint16_t>((in_[pos_] << 8) | in_[pos_ + 1]);
    pos_ += 2;
    return true;
  }
  bool u32(std::uint32_t& v) {
    if (!need(4)) return false;
    v = 0;
    for (int i = 0; i < 4; ++i) v = (v << 8) | in_[pos_++];
    return true;
  }
  bool bytes(std::size_t n, Bytes& out) {
    if (!need(n)) return false;
    out.assign(in_.begin() + static_cast<std::ptrdiff_t>(pos_), in_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
    pos_ += n;
    return true;
  }
  [[nodiscard]] std::size_t remaining() const { return in_.size() - pos_; }
  [[nodiscard]] bool done() const { return pos_ == in_.size(); }

 private:
  bool need(std::size_t n) const { return in_.size() - pos_ >= n; }
  ByteView in_;
  std::size_t pos_ = 0;
};

}  // namespace wsn
