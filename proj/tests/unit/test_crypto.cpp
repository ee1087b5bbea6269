#include <set>

#include <gtest/gtest.h>

#include "wsn/crypto.hpp"
#include "wsn/rng.hpp"

using namespace wsn;

namespace {
Key key_of(std::uint8_t fill) {
  Key k;
  k.material.fill(fill);
  return k;
}
}  // namespace

TEST(Mac, DeterministicAndKeyed) {
  const Bytes msg = to_bytes("temperature=21");
  EXPECT_EQ(crypto::mac(key_of(1), msg), crypto::mac(key_of(1), msg));
  EXPECT_NE(crypto::mac(key_of(1), msg), crypto::mac(key_of(2), msg));
  EXPECT_NE(crypto::mac(key_of(1), msg), crypto::mac(key_of(1), to_bytes("temperature=22")));
}

TEST(Mac, DomainSeparatedFromPrf) {
  const Bytes msg = to_bytes("x");
  EXPECT_NE(crypto::mac(key_of(3), msg), crypto::prf(key_of(3), msg));
}

TEST(Mac, EveryByteMatters) {
  const Bytes base = to_bytes("0123456789abcdef0123");
  const Tag t = crypto::mac(key_of(7), base);
  for (std::size_t i = 0; i < base.size(); ++i) {
    Bytes m = base;
    m[i] ^= 0x01;
    EXPECT_NE(crypto::mac(key_of(7), m), t) << "byte " << i;
  }
  Bytes longer = base;
  longer.push_back(0);
  EXPECT_NE(crypto::mac(key_of(7), longer), t);
}

TEST(Keystream, LengthAndCounterSensitivity) {
  const Key k = key_of(9);
  EXPECT_EQ(crypto::keystream(k, 0, 37).size(), 37u);
  EXPECT_NE(crypto::keystream(k, 0, 16), crypto::keystream(k, 1, 16));
  const Bytes a = crypto::keystream(k, 5, 10);
  const Bytes b = crypto::keystream(k, 5, 20);
  EXPECT_TRUE(std::equal(a.begin(), a.end(), b.begin()));
}

TEST(HashForward, ChainHasNoShortCycles) {
  std::set<std::array<std::uint8_t, 16>> seen;
  Key k = key_of(0x42);
  for (int i = 0; i < 1000; ++i) {
    EXPECT_TRUE(seen.insert(k.material).second) << "repeat at step " << i;
    k = crypto::hash_forward(k);
  }
}

TEST(TagsEqual, ComparesAllBytes) {
  Tag a, b;
  EXPECT_TRUE(crypto::tags_equal(a, b));
  b.bytes[7] = 1;
  EXPECT_FALSE(crypto::tags_equal(a, b));
}

TEST(DeriveKey, SeparatesLabelsAndArguments) {
  EXPECT_EQ(crypto::derive_key(1, "pairwise", 2, 3), crypto::derive_key(1, "pairwise", 2, 3));
  EXPECT_NE(crypto::derive_key(1, "pairwise", 2, 3), crypto::derive_key(1, "pairwise", 3, 2));
  EXPECT_NE(crypto::derive_key(1, "pairwise", 2, 3), crypto::derive_key(1, "probe", 2, 3));
  EXPECT_NE(crypto::derive_key(1, "pairwise", 2, 3), crypto::derive_key(2, "pairwise", 2, 3));
  EXPECT_FALSE(crypto::derive_key(0, "x").is_weak());
}

TEST(Rng, SameSeedSameSequence) {
  Rng a(77), b(77), c(78);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next();
    EXPECT_EQ(x, b.next());
    differs |= x != c.next();
  }
  EXPECT_TRUE(differs);
}

TEST(Rng, StreamsAreIndependent) {
  Rng s1 = Rng::stream(5, 1), s2 = Rng::stream(5, 2);
  EXPECT_NE(s1.next(), s2.next());
}

TEST(Rng, UniformIntStaysInRange) {
  Rng r(3);
  std::set<std::int64_t> seen;
  for (int i = 0; i < 2000; ++i) {
    const auto v = r.uniform_int(-2, 2);
    ASSERT_GE(v, -2);
    ASSERT_LE(v, 2);
    seen.insert(v);
  }
  EXPECT_EQ(seen.size(), 5u);
  EXPECT_EQ(r.uniform_int(4, 4), 4);
}

TEST(Rng, BernoulliEndpointsConsumeNothing) {
  Rng a(11), b(11);
  EXPECT_FALSE(a.bernoulli(0.0));
  EXPECT_TRUE(a.bernoulli(1.0));
  EXPECT_EQ(a.next(), b.next());
}

TEST(Rng, Uniform01MeanIsCentered) {
  Rng r(19);
  double sum = 0;
  for (int i = 0; i < 10000; ++i) {
    const double u = r.uniform01();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / 10000, 0.5, 0.02);
}
