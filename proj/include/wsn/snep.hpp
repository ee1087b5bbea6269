#pragma once

// Pairwise secure channel: counter-mode encryption, an 8-byte MAC over
// counter || sender || body, and freshness from a shared counter that never
// travels on the wire.

#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

#include "wsn/crypto.hpp"

namespace wsn {

using MoteId = std::uint16_t;

enum class ProtectionMode { AuthEnc, AuthOnly, None };

inline const char* to_string(ProtectionMode m) {
  switch (m) {
    case ProtectionMode::AuthEnc: return "AuthEnc";
    case ProtectionMode::AuthOnly: return "AuthOnly";
    case ProtectionMode::None: return "None";
  }
  return "?";
}

inline std::optional<ProtectionMode> protection_mode_from_string(std::string_view s) {
  if (s == "AuthEnc") return ProtectionMode::AuthEnc;
  if (s == "AuthOnly") return ProtectionMode::AuthOnly;
  if (s == "None") return ProtectionMode::None;
  return std::nullopt;
}

inline std::size_t security_overhead(ProtectionMode m) { return m == ProtectionMode::None ? 0 : Tag::kSize; }

enum class SnepErrc { PayloadTooLarge, CounterExhausted, MacMismatch, StaleCounter };

inline const char* to_string(SnepErrc e) {
  switch (e) {
    case SnepErrc::PayloadTooLarge: return "PayloadTooLarge";
    case SnepErrc::CounterExhausted: return "CounterExhausted";
    case SnepErrc::MacMismatch: return "MacMismatch";
    case SnepErrc::StaleCounter: return "StaleCounter";
  }
  return "?";
}

class SnepError : public std::runtime_error {
 public:
  explicit SnepError(SnepErrc code) : std::runtime_error(to_string(code)), code_(code) {}
  [[nodiscard]] SnepErrc code() const noexcept { return code_; }

 private:
  SnepErrc code_;
};

struct SecuredPayload {
  Bytes body;
  std::optional<Tag> tag;

  [[nodiscard]] std::size_t size() const { return body.size() + (tag ? Tag::kSize : 0); }

  /// Wire layout: body bytes followed by the 8 tag bytes.
  [[nodiscard]] Bytes to_wire() const {
    Bytes out = body;
    if (tag) out.insert(out.end(), tag->bytes.begin(), tag->bytes.end());
    return out;
  }

  static std::optional<SecuredPayload> from_wire(ByteView wire, ProtectionMode mode) {
    SecuredPayload p;
    if (mode == ProtectionMode::None) {
      p.body.assign(wire.begin(), wire.end());
      return p;
    }
    if (wire.size() < Tag::kSize) return std::nullopt;
    const std::size_t n = wire.size() - Tag::kSize;
    p.body.assign(wire.begin(), wire.begin() + static_cast<std::ptrdiff_t>(n));
    Tag t;
    std::copy(wire.begin() + static_cast<std::ptrdiff_t>(n), wire.end(), t.bytes.begin());
    p.tag = t;
    return p;
  }
};

struct SnepConfig {
  MoteId local = 0;
  MoteId peer = 0;
  Key enc_key;
  Key mac_key;
  ProtectionMode mode = ProtectionMode::AuthEnc;
  std::size_t max_payload = 64;
  std::uint64_t window = 16;
  std::uint64_t counter_send = 0;
  std::uint64_t counter_recv = 0;
};

/// One direction-pair of a pairwise channel, owned by `local`. The mirror
/// channel at `peer` shares both keys; local.counter_send tracks
/// peer.counter_recv.
class SnepChannel {
 public:
  explicit SnepChannel(const SnepConfig& cfg) : cfg_(cfg) {
    if (cfg_.enc_key == cfg_.mac_key) throw std::invalid_argument("SNEP encryption and MAC keys must differ");
    if (cfg_.window == 0) throw std::invalid_argument("SNEP receive window must be positive");
  }

  /// Both directions derive the same key pair from a pairwise master key.
  static SnepChannel from_master(MoteId local, MoteId peer, const Key& master, ProtectionMode mode,
                                 std::size_t max_payload = 64) {
    SnepConfig cfg;
    cfg.local = local;
    cfg.peer = peer;
    cfg.mode = mode;
    cfg.max_payload = max_payload;
    cfg.enc_key = derive_subkey(master, 0x45);
    cfg.mac_key = derive_subkey(master, 0x4d);
    return SnepChannel(cfg);
  }

  [[nodiscard]] MoteId local() const { return cfg_.local; }
  [[nodiscard]] MoteId peer() const { return cfg_.peer; }
  [[nodiscard]] ProtectionMode mode() const { return cfg_.mode; }
  [[nodiscard]] std::uint64_t counter_send() const { return cfg_.counter_send; }
  [[nodiscard]] std::uint64_t counter_recv() const { return cfg_.counter_recv; }
  [[nodiscard]] std::uint64_t window() const { return cfg_.window; }
  [[nodiscard]] std::size_t max_payload() const { return cfg_.max_payload; }
  [[nodiscard]] const Key& mac_key() const { return cfg_.mac_key; }

  SecuredPayload send(ByteView plaintext) {
    if (plaintext.size() > cfg_.max_payload) throw SnepError(SnepErrc::PayloadTooLarge);
    if (cfg_.counter_send == std::numeric_limits<std::uint64_t>::max()) throw SnepError(SnepErrc::CounterExhausted);

    SecuredPayload out;
    out.body.assign(plaintext.begin(), plaintext.end());
    if (cfg_.mode == ProtectionMode::AuthEnc) {
      const Bytes ks = crypto::keystream(cfg_.enc_key, cfg_.counter_send, out.body.size());
      for (std::size_t i = 0; i < out.body.size(); ++i) out.body[i] ^= ks[i];
    }
    if (cfg_.mode != ProtectionMode::None) out.tag = tag_for(cfg_.counter_send, cfg_.local, out.body);
    ++cfg_.counter_send;
    return out;
  }

  /// Strict receive at an explicit counter value.
  Bytes receive(const SecuredPayload& payload, std::uint64_t claimed_counter) {
    if (claimed_counter < cfg_.counter_recv) throw SnepError(SnepErrc::StaleCounter);
    if (cfg_.mode != ProtectionMode::None && !verifies(payload, claimed_counter)) throw SnepError(SnepErrc::MacMismatch);
    return accept(payload, claimed_counter);
  }

  /// Loss-tolerant receive: tries counter_recv .. counter_recv + window - 1.
  /// A payload that only verifies at an already-consumed counter is a replay.
  Bytes receive(const SecuredPayload& payload) {
    if (cfg_.mode == ProtectionMode::None) return accept(payload, cfg_.counter_recv);
    for (std::uint64_t i = 0; i < cfg_.window; ++i) {
      const std::uint64_t c = cfg_.counter_recv + i;
      if (c < cfg_.counter_recv) break;  // wrapped
      if (verifies(payload, c)) return accept(payload, c);
    }
    const std::uint64_t lookback = std::min(cfg_.window, cfg_.counter_recv);
    for (std::uint64_t i = 1; i <= lookback; ++i) {
      if (verifies(payload, cfg_.counter_recv - i)) throw SnepError(SnepErrc::StaleCounter);
    }
    throw SnepError(SnepErrc::MacMismatch);
  }

  [[nodiscard]] Tag resync_proof(std::uint64_t counter_claim) const {
    return crypto::mac(cfg_.mac_key, resync_message(counter_claim));
  }

  /// Advance counter_recv to the peer's claim; never moves it backwards.
  void resync(std::uint64_t peer_counter_claim, const Tag& proof) {
    if (!crypto::tags_equal(proof, resync_proof(peer_counter_claim))) throw SnepError(SnepErrc::MacMismatch);
    cfg_.counter_recv = std::max(cfg_.counter_recv, peer_counter_claim);
  }

 private:
  static Key derive_subkey(const Key& master, std::uint8_t label) {
    const std::array<std::uint8_t, 2> lo{label, 0};
    const std::array<std::uint8_t, 2> hi{label, 1};
    Key k;
    const Tag a = crypto::prf(master, lo);
    const Tag b = crypto::prf(master, hi);
    std::copy(a.bytes.begin(), a.bytes.end(), k.material.begin());
    std::copy(b.bytes.begin(), b.bytes.end(), k.material.begin() + 8);
    return k;
  }

  static Bytes resync_message(std::uint64_t claim) {
    Bytes msg = to_bytes("RESYNC");
    for (int s = 56; s >= 0; s -= 8) msg.push_back(static_cast<std::uint8_t>(claim >> s));
    return msg;
  }

  [[nodiscard]] Tag tag_for(std::uint64_t counter, MoteId sender, ByteView body) const {
    Bytes input;
    input.reserve(10 + body.size());
    for (int s = 56; s >= 0; s -= 8) input.push_back(static_cast<std::uint8_t>(counter >> s));
    input.push_back(static_cast<std::uint8_t>(sender >> 8));
    input.push_back(static_cast<std::uint8_t>(sender));
    input.insert(input.end(), body.begin(), body.end());
    return crypto::mac(cfg_.mac_key, input);
  }

  [[nodiscard]] bool verifies(const SecuredPayload& payload, std::uint64_t counter) const {
    if (!payload.tag) return false;
    return crypto::tags_equal(*payload.tag, tag_for(counter, cfg_.peer, payload.body));
  }

  Bytes accept(const SecuredPayload& payload, std::uint64_t counter) {
    Bytes plain = payload.body;
    if (cfg_.mode == ProtectionMode::AuthEnc) {
      const Bytes ks = crypto::keystream(cfg_.enc_key, counter, plain.size());
      for (std::size_t i = 0; i < plain.size(); ++i) plain[i] ^= ks[i];
    }
    cfg_.counter_recv = counter == std::numeric_limits<std::uint64_t>::max() ? counter : counter + 1;
    return plain;
  }

  SnepConfig cfg_;
};

}  // namespace wsn
