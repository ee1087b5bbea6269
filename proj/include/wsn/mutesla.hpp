#pragma once

// Authenticated broadcast from a one-way key chain with delayed disclosure.
// The sender MACs interval-i traffic with K_i and publishes K_i d intervals
// later; receivers buffer only packets whose key cannot have been published
// yet, and authenticate them once the key arrives and chain-verifies.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "wsn/crypto.hpp"

namespace wsn {

/// Simulated time in milliseconds.
using SimTime = std::int64_t;

struct ChainParams {
  std::uint32_t length = 200;
  SimTime interval_len = 500;
  std::uint32_t disclosure_delay = 2;
  SimTime start_time = 0;

  /// Time at which K_index may be published.
  [[nodiscard]] SimTime disclosure_time(std::uint32_t index) const {
    return start_time + (static_cast<SimTime>(index) - 1 + disclosure_delay) * interval_len;
  }
  [[nodiscard]] SimTime end_time() const { return start_time + static_cast<SimTime>(length) * interval_len; }
};

enum class MuteslaErrc { ChainExpired, BadChainKey };

class MuteslaError : public std::runtime_error {
 public:
  explicit MuteslaError(MuteslaErrc code)
      : std::runtime_error(code == MuteslaErrc::ChainExpired ? "ChainExpired" : "BadChainKey"), code_(code) {}
  [[nodiscard]] MuteslaErrc code() const noexcept { return code_; }

 private:
  MuteslaErrc code_;
};

namespace detail {
inline void put_be32(Bytes& out, std::uint32_t v) {
  for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(v >> s));
}
inline std::uint32_t get_be32(ByteView in) {
  return (std::uint32_t{in[0]} << 24) | (std::uint32_t{in[1]} << 16) | (std::uint32_t{in[2]} << 8) | in[3];
}
}  // namespace detail

struct BroadcastPacket {
  Bytes message;
  std::uint32_t interval_index = 0;
  Tag tag;

  static Tag compute_tag(const Key& key, std::uint32_t index, ByteView message) {
    Bytes input;
    detail::put_be32(input, index);
    input.insert(input.end(), message.begin(), message.end());
    return crypto::mac(key, input);
  }

  /// 4-byte big-endian interval index, message, 8 tag bytes.
  [[nodiscard]] Bytes to_wire() const {
    Bytes out;
    detail::put_be32(out, interval_index);
    out.insert(out.end(), message.begin(), message.end());
    out.insert(out.end(), tag.bytes.begin(), tag.bytes.end());
    return out;
  }

  static std::optional<BroadcastPacket> from_wire(ByteView wire) {
    if (wire.size() < 4 + Tag::kSize) return std::nullopt;
    BroadcastPacket p;
    p.interval_index = detail::get_be32(wire);
    p.message.assign(wire.begin() + 4, wire.end() - Tag::kSize);
    std::copy(wire.end() - Tag::kSize, wire.end(), p.tag.bytes.begin());
    return p;
  }
};

struct KeyDisclosure {
  std::uint32_t interval_index = 0;
  Key key;

  /// 4-byte big-endian interval index followed by the 16 key bytes.
  [[nodiscard]] Bytes to_wire() const {
    Bytes out;
    detail::put_be32(out, interval_index);
    out.insert(out.end(), key.material.begin(), key.material.end());
    return out;
  }

  static std::optional<KeyDisclosure> from_wire(ByteView wire) {
    if (wire.size() != 4 + 16) return std::nullopt;
    KeyDisclosure d;
    d.interval_index = detail::get_be32(wire);
    std::copy(wire.begin() + 4, wire.end(), d.key.material.begin());
    return d;
  }
};

/// Sender-side key chain. keys_[i] holds K_i; keys_[0] is the commitment.
class KeyChain {
 public:
  static KeyChain generate(const Key& seed, const ChainParams& params) {
    if (params.length == 0) throw std::invalid_argument("key chain length must be >= 1");
    if (params.disclosure_delay == 0) throw std::invalid_argument("disclosure delay must be >= 1");
    if (params.interval_len <= 0) throw std::invalid_argument("interval length must be positive");
    KeyChain chain;
    chain.params_ = params;
    chain.keys_.resize(params.length + 1);
    Key k = crypto::hash_forward(seed);
    for (std::uint32_t i = params.length;; --i) {
      chain.keys_[i] = k;
      if (i == 0) break;
      k = crypto::hash_forward(k);
    }
    return chain;
  }

  [[nodiscard]] const ChainParams& params() const { return params_; }
  [[nodiscard]] const Key& commitment() const { return keys_[0]; }
  [[nodiscard]] const Key& key(std::uint32_t index) const { return keys_.at(index); }
  [[nodiscard]] std::uint32_t last_disclosed() const { return last_disclosed_; }

  [[nodiscard]] std::optional<std::uint32_t> interval_at(SimTime now) const {
    if (now < params_.start_time || now >= params_.end_time()) return std::nullopt;
    return static_cast<std::uint32_t>((now - params_.start_time) / params_.interval_len) + 1;
  }

  [[nodiscard]] BroadcastPacket broadcast(ByteView message, SimTime now) const {
    const auto index = interval_at(now);
    if (!index) throw MuteslaError(MuteslaErrc::ChainExpired);
    BroadcastPacket p;
    p.message.assign(message.begin(), message.end());
    p.interval_index = *index;
    p.tag = BroadcastPacket::compute_tag(keys_[*index], *index, p.message);
    return p;
  }

  /// Publishes the newest key whose disclosure time has passed, once.
  std::optional<KeyDisclosure> disclose(SimTime now) {
    if (now < params_.disclosure_time(1)) return std::nullopt;
    const SimTime since = now - params_.start_time;
    std::int64_t newest = since / params_.interval_len + 1 - static_cast<std::int64_t>(params_.disclosure_delay);
    newest = std::min<std::int64_t>(newest, params_.length);
    if (newest <= static_cast<std::int64_t>(last_disclosed_)) return std::nullopt;
    last_disclosed_ = static_cast<std::uint32_t>(newest);
    return KeyDisclosure{last_disclosed_, keys_[last_disclosed_]};
  }

 private:
  ChainParams params_;
  std::vector<Key> keys_;
  std::uint32_t last_disclosed_ = 0;
};

enum class DiscardReason { KeyAlreadyDisclosed, InvalidInterval };

struct ReceiveOutcome {
  bool buffered = false;
  std::optional<DiscardReason> reason;
};

/// Receiver-side state: commitment, verified-index watermark, and the buffer
/// of not-yet-authenticated packets.
class MuteslaReceiver {
 public:
  struct Entry {
    BroadcastPacket packet;
    SimTime arrival_time;
  };

  MuteslaReceiver(const Key& commitment, const ChainParams& params, SimTime max_clock_error)
      : verified_key_(commitment), params_(params), eps_(max_clock_error) {}

  [[nodiscard]] std::uint32_t last_verified_index() const { return last_verified_; }
  [[nodiscard]] const std::vector<Entry>& buffer() const { return buffer_; }
  [[nodiscard]] std::uint64_t mac_failures() const { return mac_failures_; }
  [[nodiscard]] SimTime max_clock_error() const { return eps_; }

  /// Safety check under worst-case clock error: buffer only if the sender
  /// cannot yet have published K_{interval_index}.
  ReceiveOutcome receive(const BroadcastPacket& packet, SimTime arrival_time) {
    if (packet.interval_index == 0 || packet.interval_index > params_.length) {
      return {false, DiscardReason::InvalidInterval};
    }
    if (arrival_time + eps_ < params_.disclosure_time(packet.interval_index)) {
      buffer_.push_back({packet, arrival_time});
      return {true, std::nullopt};
    }
    return {false, DiscardReason::KeyAlreadyDisclosed};
  }

  /// Verifies the disclosed key against the last verified key, then releases
  /// buffered messages of that interval whose tags match. Throws BadChainKey
  /// and leaves all state untouched when the chain link fails. Disclosures at
  /// or below the watermark are ignored.
  std::vector<Bytes> on_disclosure(const Key& disclosed, std::uint32_t interval_index) {
    if (interval_index <= last_verified_ || interval_index > params_.length) return {};
    Key k = disclosed;
    for (std::uint32_t i = 0; i < interval_index - last_verified_; ++i) k = crypto::hash_forward(k);
    if (!(k == verified_key_)) throw MuteslaError(MuteslaErrc::BadChainKey);

    std::vector<Bytes> released;
    std::vector<Entry> kept;
    kept.reserve(buffer_.size());
    for (auto& e : buffer_) {
      if (e.packet.interval_index != interval_index) {
        kept.push_back(std::move(e));
        continue;
      }
      const Tag expect = BroadcastPacket::compute_tag(disclosed, interval_index, e.packet.message);
      if (crypto::tags_equal(expect, e.packet.tag)) {
        released.push_back(std::move(e.packet.message));
      } else {
        ++mac_failures_;
      }
    }
    buffer_ = std::move(kept);
    verified_key_ = disclosed;
    last_verified_ = interval_index;
    return released;
  }

  /// Drops everything still buffered once the chain has ended.
  std::size_t expire(SimTime now) {
    if (now < params_.end_time() + static_cast<SimTime>(params_.disclosure_delay) * params_.interval_len) return 0;
    const std::size_t n = buffer_.size();
    buffer_.clear();
    return n;
  }

 private:
  Key verified_key_;
  ChainParams params_;
  SimTime eps_;
  std::uint32_t last_verified_ = 0;
  std::vector<Entry> buffer_;
  std::uint64_t mac_failures_ = 0;
};

}  // namespace wsn
