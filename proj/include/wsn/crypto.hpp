#pragma once

// Simulation-grade keyed primitives. The construction is a 64-bit
// multiply-xor-shift finalizer iterated over 8-byte little-endian blocks in
// two keyed rounds. It is bit-exact on every platform and is NOT meant to
// resist a real adversary.

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace wsn {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

inline Bytes to_bytes(std::string_view s) { return Bytes(s.begin(), s.end()); }

/// 128-bit symmetric key.
struct Key {
  std::array<std::uint8_t, 16> material{};

  /// All-zero material is legal but reported as weak.
  [[nodiscard]] bool is_weak() const {
    return std::all_of(material.begin(), material.end(), [](std::uint8_t b) { return b == 0; });
  }

  friend bool operator==(const Key&, const Key&) = default;
};

/// 8-byte authentication tag; the whole of the per-message security overhead.
struct Tag {
  static constexpr std::size_t kSize = 8;
  std::array<std::uint8_t, kSize> bytes{};

  friend bool operator==(const Tag&, const Tag&) = default;
};

namespace crypto {

enum class Domain : std::uint8_t { Prf = 0x00, Mac = 0x01, Keystream = 0x02, Chain = 0x03 };

namespace detail {

constexpr std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

constexpr std::uint64_t rotl(std::uint64_t x, int r) { return (x << r) | (x >> (64 - r)); }

inline std::uint64_t load_le64(ByteView in) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < in.size() && i < 8; ++i) v |= std::uint64_t{in[i]} << (8 * i);
  return v;
}

inline void store_le64(std::uint64_t v, std::span<std::uint8_t> out) {
  for (std::size_t i = 0; i < out.size() && i < 8; ++i) out[i] = static_cast<std::uint8_t>(v >> (8 * i));
}

// Message = domain byte followed by data, split into zero-padded 8-byte blocks.
inline std::vector<std::uint64_t> to_blocks(Domain domain, ByteView data) {
  Bytes msg;
  msg.reserve(data.size() + 1);
  msg.push_back(static_cast<std::uint8_t>(domain));
  msg.insert(msg.end(), data.begin(), data.end());
  std::vector<std::uint64_t> blocks;
  blocks.reserve((msg.size() + 7) / 8);
  for (std::size_t off = 0; off < msg.size(); off += 8) {
    blocks.push_back(load_le64(ByteView(msg).subspan(off, std::min<std::size_t>(8, msg.size() - off))));
  }
  return blocks;
}

inline std::uint64_t keyed_hash64(const Key& key, Domain domain, ByteView data) {
  const std::uint64_t k0 = load_le64(ByteView(key.material).first(8));
  const std::uint64_t k1 = load_le64(ByteView(key.material).subspan(8, 8));
  const std::uint64_t len = data.size() + 1;
  const auto blocks = to_blocks(domain, data);

  std::uint64_t h = mix64(k0 ^ (len * 0x9e3779b97f4a7c15ULL));
  for (std::uint64_t b : blocks) h = mix64(h ^ b);
  h = mix64(h ^ k1);
  for (std::uint64_t b : blocks) h = mix64(rotl(h, 23) ^ b);
  return mix64(h ^ k0 ^ len);
}

}  // namespace detail

inline Tag tag_from_word(std::uint64_t w) {
  Tag t;
  detail::store_le64(w, t.bytes);
  return t;
}

/// Keyed pseudo-random function (domain 0x00).
inline Tag prf(const Key& key, ByteView data) {
  return tag_from_word(detail::keyed_hash64(key, Domain::Prf, data));
}

/// Message authentication code: the PRF core under domain 0x01.
inline Tag mac(const Key& key, ByteView message) {
  return tag_from_word(detail::keyed_hash64(key, Domain::Mac, message));
}

/// Counter-indexed keystream; block j is the keyed hash of counter || j.
inline Bytes keystream(const Key& key, std::uint64_t counter, std::size_t length) {
  Bytes out(length);
  std::array<std::uint8_t, 16> input{};
  detail::store_le64(counter, std::span(input).first(8));
  for (std::size_t off = 0, j = 0; off < length; off += 8, ++j) {
    detail::store_le64(j, std::span(input).subspan(8, 8));
    std::array<std::uint8_t, 8> block{};
    detail::store_le64(detail::keyed_hash64(key, Domain::Keystream, input), block);
    std::copy_n(block.begin(), std::min<std::size_t>(8, length - off), out.begin() + static_cast<std::ptrdiff_t>(off));
  }
  return out;
}

/// One-way chain step F used to build broadcast key chains.
inline Key hash_forward(const Key& key) {
  static constexpr std::array<std::uint8_t, 1> lo_label{0x00};
  static constexpr std::array<std::uint8_t, 1> hi_label{0x01};
  Key next;
  detail::store_le64(detail::keyed_hash64(key, Domain::Chain, lo_label), std::span(next.material).first(8));
  detail::store_le64(detail::keyed_hash64(key, Domain::Chain, hi_label), std::span(next.material).subspan(8, 8));
  return next;
}

/// Full-width tag comparison; always inspects all eight bytes.
inline bool tags_equal(const Tag& a, const Tag& b) {
  std::uint8_t diff = 0;
  for (std::size_t i = 0; i < Tag::kSize; ++i) diff |= static_cast<std::uint8_t>(a.bytes[i] ^ b.bytes[i]);
  return diff == 0;
}

/// Deterministic key derivation for deployment-time key assignment.
inline Key derive_key(std::uint64_t seed, std::string_view label, std::uint64_t a = 0, std::uint64_t b = 0) {
  Key root;
  detail::store_le64(detail::mix64(seed ^ 0x5157a1c0ffee1234ULL), std::span(root.material).first(8));
  detail::store_le64(detail::mix64(seed + 0x243f6a8885a308d3ULL), std::span(root.material).subspan(8, 8));
  Bytes info = to_bytes(label);
  std::array<std::uint8_t, 16> ids{};
  detail::store_le64(a, std::span(ids).first(8));
  detail::store_le64(b, std::span(ids).subspan(8, 8));
  info.insert(info.end(), ids.begin(), ids.end());
  Key out;
  info.push_back(0);
  detail::store_le64(detail::keyed_hash64(root, Domain::Prf, info), std::span(out.material).first(8));
  info.back() = 1;
  detail::store_le64(detail::keyed_hash64(root, Domain::Prf, info), std::span(out.material).subspan(8, 8));
  return out;
}

}  // namespace crypto
}  // namespace wsn
