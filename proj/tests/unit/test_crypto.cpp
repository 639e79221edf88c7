// Copyright 2026 The EBAKE Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <set>

#include "ebake/crypto/cipher.hpp"
#include "ebake/crypto/counters.hpp"
#include "ebake/crypto/ec.hpp"
#include "ebake/crypto/hash.hpp"
#include "oracle/p256_oracle.hpp"

namespace {

using namespace ebake;
using namespace ebake::crypto;

oracle::AffinePoint to_oracle(const Point& p) {
  if (p.is_identity()) return {};
  return {false, oracle::from_be(p.x().data(), 32), oracle::from_be(p.y().data(), 32)};
}

Scalar scalar_from_hex(const char* hex) { return Scalar::from_bytes_checked(from_hex(hex)); }

Bytes32 b32(const char* hex) {
  const Bytes raw = from_hex(hex);
  Bytes32 out{};
  std::copy(raw.begin(), raw.end(), out.begin());
  return out;
}

// Published P-256 multiples: 2G and 3G, and the RFC 6979 A.2.5 key pair.
struct KnownMultiple {
  const char* k;
  const char* x;
  const char* y;
};
constexpr KnownMultiple kKnown[] = {
    {"0000000000000000000000000000000000000000000000000000000000000002",
     "7cf27b188d034f7e8a52380304b51ac3c08969e277f21b35a60b48fc47669978",
     "07775510db8ed040293d9ac69f7430dbba7dade63ce982299e04b79d227873d1"},
    {"0000000000000000000000000000000000000000000000000000000000000003",
     "5ecbe4d1a6330a44c8f7ef951d4bf165e6c6b721efada985fb41661bc6e7fd6c",
     "8734640c4998ff7e374b06ce1a64a2ecd82ab036384fb83d9a79b127a27d5032"},
    {"c9afa9d845ba75166b5c215767b1d6934e50c3db36e89b127b8a622b120f6721",
     "60fed4ba255a9d31c961eb74c6356d68c049b8923b61fa6ce669622e60f29fb6",
     "7903fe1008b8bc99a41ae9e95628bc64f2f1b20c2d7e9f5177a3c294d4462299"},
};

TEST(CurveParams, MatchIndependentConstants) {
  const oracle::P256 ref;
  const auto& c = p256();
  EXPECT_EQ(oracle::from_be(c.p.data(), 32), ref.p());
  EXPECT_EQ(oracle::from_be(c.a.data(), 32), ref.a());
  EXPECT_EQ(oracle::from_be(c.b.data(), 32), ref.b());
  EXPECT_EQ(oracle::from_be(c.n.data(), 32), ref.n());
  EXPECT_EQ(c.cofactor, 1u);
  EXPECT_EQ(to_oracle(generator()), ref.g());
}

TEST(CurveParams, NondegenerateAndBasePointOrder) {
  const oracle::P256 ref;
  EXPECT_NE(ref.discriminant_term(), 0);
  EXPECT_TRUE(ref.on_curve(ref.g()));
  EXPECT_TRUE(ref.double_and_add(ref.n(), ref.g()).infinity);
  // n*P via the library: (n-1)P + P is the identity.
  const oracle::AffinePoint big = ref.double_and_add(ref.n() - 1, ref.g());
  const Scalar n_minus_1 = Scalar::from_bytes_checked(oracle::to_be32(ref.n() - 1));
  EXPECT_EQ(to_oracle(base_mult(n_minus_1)), big);
  EXPECT_TRUE(point_add(base_mult(n_minus_1), generator()).is_identity());
}

TEST(ScalarMult, IdentityScalarAndDoubling) {
  const Point g = generator();
  EXPECT_EQ(scalar_mult(Scalar::from_u64(1), g), g);
  EXPECT_EQ(scalar_mult(Scalar::from_u64(2), g), point_add(g, g));
}

TEST(ScalarMult, PublishedVectors) {
  const oracle::P256 ref;
  for (const auto& kv : kKnown) {
    const Scalar k = scalar_from_hex(kv.k);
    const Point expected = Point::from_affine(b32(kv.x), b32(kv.y));
    EXPECT_EQ(scalar_mult(k, generator()), expected) << kv.k;
    EXPECT_EQ(base_mult(k), expected) << kv.k;
    EXPECT_EQ(to_oracle(expected), ref.double_and_add(oracle::from_hex(kv.k), ref.g())) << kv.k;
  }
}

TEST(ScalarMult, MatchesRepeatedAdditionOracleForSmallScalars) {
  const oracle::P256 ref;
  DeterministicRandom rng(7);
  for (int i = 0; i < 100; ++i) {
    const std::uint64_t k = rng.uniform(1, 600);
    EXPECT_EQ(to_oracle(scalar_mult(Scalar::from_u64(k), generator())), ref.repeated_add(k, ref.g()))
        << "k=" << k;
  }
}

TEST(ScalarMult, MatchesDoubleAndAddOnRandomBase) {
  const oracle::P256 ref;
  DeterministicRandom rng(8);
  for (int i = 0; i < 20; ++i) {
    const Scalar a = random_scalar(rng);
    const Scalar k = random_scalar(rng);
    const Point q = base_mult(a);
    const auto expected = ref.double_and_add(oracle::from_be(k.bytes().data(), 32), to_oracle(q));
    EXPECT_EQ(to_oracle(scalar_mult(k, q)), expected);
  }
}

TEST(PointAdd, IdentityAndInverse) {
  const Point q = base_mult(Scalar::from_u64(12345));
  EXPECT_EQ(point_add(q, Point::identity()), q);
  EXPECT_EQ(point_add(Point::identity(), q), q);
  EXPECT_TRUE(point_add(q, q.negate()).is_identity());
}

TEST(PointAdd, SmallMultiplesAgreeWithRepeatedAddition) {
  const oracle::P256 ref;
  for (std::uint64_t a = 1; a <= 6; ++a) {
    for (std::uint64_t b = 1; b <= 6; ++b) {
      const Point sum = point_add(base_mult(Scalar::from_u64(a)), base_mult(Scalar::from_u64(b)));
      EXPECT_EQ(to_oracle(sum), ref.repeated_add(a + b, ref.g())) << a << "+" << b;
    }
  }
}

TEST(GroupLaws, AssociativityCommutativityDistributivity) {
  DeterministicRandom rng(9);
  for (int i = 0; i < 10; ++i) {
    const Point p1 = base_mult(random_scalar(rng));
    const Point p2 = base_mult(random_scalar(rng));
    const Point p3 = base_mult(random_scalar(rng));
    EXPECT_EQ(point_add(p1, p2), point_add(p2, p1));
    EXPECT_EQ(point_add(point_add(p1, p2), p3), point_add(p1, point_add(p2, p3)));
    const Scalar a = Scalar::from_u64(rng.uniform(1, 1u << 20));
    const Scalar b = Scalar::from_u64(rng.uniform(1, 1u << 20));
    EXPECT_EQ(base_mult(a.add(b)), point_add(base_mult(a), base_mult(b)));
  }
}

TEST(PointValidation, RejectsOffCurveAndMalformed) {
  Bytes32 x = generator().x();
  Bytes32 y = generator().y();
  y[31] ^= 1;
  EXPECT_THROW(Point::from_affine(x, y), InvalidPoint);
  Bytes enc = generator().compressed_bytes();
  enc[0] = 0x04;
  EXPECT_THROW(Point::decompress(enc), InvalidPoint);
  EXPECT_THROW(Point::decompress(Bytes(32, 0x02)), InvalidPoint);
  EXPECT_THROW(Point::identity().compressed(), InvalidPoint);
  // Roughly half of all x have no curve point; one of the first few must fail.
  Bytes bad(33, 0);
  bad[0] = 0x02;
  bool rejected = false;
  for (std::uint8_t v = 1; v < 20 && !rejected; ++v) {
    bad[32] = v;
    try {
      Point::decompress(bad);
    } catch (const InvalidPoint&) {
      rejected = true;
    }
  }
  EXPECT_TRUE(rejected);
}

TEST(PointEncoding, CompressRoundtrip) {
  DeterministicRandom rng(10);
  for (int i = 0; i < 50; ++i) {
    const Point q = base_mult(random_scalar(rng));
    const auto c = q.compressed();
    EXPECT_EQ(c.size(), 33u);
    EXPECT_TRUE(c[0] == 0x02 || c[0] == 0x03);
    EXPECT_EQ(Point::decompress(c), q);
  }
}

TEST(ScalarRange, RejectsZeroAndOrder) {
  EXPECT_FALSE(Scalar::from_bytes(Bytes(32, 0)).has_value());
  EXPECT_FALSE(Scalar::from_bytes(to_bytes(p256().n)).has_value());
  EXPECT_FALSE(Scalar::from_bytes(Bytes(31, 1)).has_value());
  EXPECT_THROW(Scalar::from_u64(0), InvalidScalar);
}

TEST(Random, ScalarsInRangeAndDistinct) {
  std::set<Bytes32> seen;
  for (int i = 0; i < 10000; ++i) {
    const Scalar s = random_scalar(system_random());
    ASSERT_TRUE(Scalar::from_bytes(s.bytes()).has_value());
    seen.insert(s.bytes());
  }
  EXPECT_EQ(seen.size(), 10000u);
}

TEST(Random, NoncesHaveRequestedLengthAndDoNotRepeat) {
  std::set<Bytes> seen;
  for (int i = 0; i < 10000; ++i) {
    const Bytes n = random_nonce(system_random());
    ASSERT_EQ(n.size(), kNonceSize);
    seen.insert(n);
  }
  EXPECT_EQ(seen.size(), 10000u);
  EXPECT_EQ(random_nonce(system_random(), 7).size(), 7u);
}

TEST(Random, DeterministicStreamIsReproducible) {
  DeterministicRandom a(42), b(42), c(43);
  EXPECT_EQ(a.bytes(100), b.bytes(100));
  EXPECT_NE(DeterministicRandom(42).bytes(32), c.bytes(32));
  for (int i = 0; i < 1000; ++i) {
    const auto v = a.uniform(5, 30);
    EXPECT_GE(v, 5u);
    EXPECT_LE(v, 30u);
  }
}

TEST(Hash, DeterministicAndFramed) {
  using codec::Field;
  const Bytes a = {1, 2, 3};
  const Bytes b = {4, 5};
  Bytes ab = a;
  ab.insert(ab.end(), b.begin(), b.end());
  const Digest d1 = hash("t", {Field::bytes(a), Field::bytes(b)});
  EXPECT_EQ(d1, hash("t", {Field::bytes(a), Field::bytes(b)}));
  EXPECT_NE(d1, hash("t", {Field::bytes(ab)}));
  EXPECT_NE(d1, hash("t", {Field::bytes(b), Field::bytes(a)}));
  EXPECT_NE(d1, hash("u", {Field::bytes(a), Field::bytes(b)}));
}

// Frozen from an independent Python encoder + hashlib.
TEST(Hash, FrozenVectors) {
  using codec::Field;
  EXPECT_EQ(hash("EBAKE-empty", {}).hex(),
            "4e76d7e36084827c2cd4611ae03d4b5ed0ec687b941d079b54c792421caa24f5");
  Bytes id(16);
  for (int i = 0; i < 16; ++i) id[i] = static_cast<std::uint8_t>(i);
  const Digest dp1 = hash("EBAKE-DP1", {Field::id(id), to_field(Scalar::from_u64(1)),
                                        Field::bytes(Bytes(20, 0xaa))});
  EXPECT_EQ(dp1.hex(), "1baa3a2eac09672dc6ab26a40f4a9f0f0bac31c967835343ffa234176f643667");
}

TEST(ExpandMask, FrozenVectorPrefixAndDeterminism) {
  const Digest d = detail::sha256(as_view("abc"));
  EXPECT_EQ(to_hex(expand_mask(d, 40)),
            "5d2cc1cab2e6e36d55d1e3c27b5b818587bc9a2b658f84c27e0dee7234b41cbff4021b93371e5ac1");
  const Bytes m33 = expand_mask(d, 33);
  const Bytes m32 = expand_mask(d, 32);
  EXPECT_TRUE(std::equal(m32.begin(), m32.end(), m33.begin()));
  EXPECT_EQ(m33, expand_mask(d, 33));
  EXPECT_EQ(expand_mask(d, kMaxMaskLength).size(), kMaxMaskLength);
  EXPECT_THROW(expand_mask(d, kMaxMaskLength + 1), std::invalid_argument);
}

TEST(ExpandMask, DistinctDigestsGiveDistinctMasks) {
  DeterministicRandom rng(11);
  for (int i = 0; i < 500; ++i) {
    const Digest d1 = Digest::from_bytes(rng.bytes(32));
    const Digest d2 = Digest::from_bytes(rng.bytes(32));
    ASSERT_NE(d1, d2);
    EXPECT_NE(expand_mask(d1, 33), expand_mask(d2, 33));
  }
}

TEST(XorMask, IsAnInvolution) {
  const Digest d = detail::sha256(as_view("mask"));
  const Bytes data = generator().compressed_bytes();
  EXPECT_EQ(xor_mask(d, xor_mask(d, data)), data);
}

TEST(Sym, RoundtripWrongKeyAndBitFlip) {
  auto& rng = system_random();
  const SymKey k = SymKey::generate(rng);
  const SymKey k2 = SymKey::generate(rng);
  EXPECT_EQ(k.raw().size(), 20u);
  const Bytes m = {'h', 'e', 'l', 'l', 'o'};
  const Bytes ct = sym_encrypt(k, m, rng);
  EXPECT_EQ(sym_decrypt(k, ct), m);
  EXPECT_THROW(sym_decrypt(k2, ct), AuthenticationError);
  for (std::size_t bit = 0; bit < ct.size() * 8; ++bit) {
    Bytes t = ct;
    t[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
    EXPECT_THROW(sym_decrypt(k, t), AuthenticationError) << "bit " << bit;
  }
  EXPECT_THROW(sym_decrypt(k, Bytes(10)), AuthenticationError);
  EXPECT_EQ(sym_decrypt(k, sym_encrypt(k, {}, rng)), Bytes{});
}

TEST(Sym, KeyMustBe160Bits) {
  EXPECT_THROW(SymKey::from_bytes(Bytes(16)), std::invalid_argument);
  EXPECT_NO_THROW(SymKey::from_bytes(Bytes(20)));
}

TEST(Asym, RoundtripForVariousLengths) {
  auto& rng = system_random();
  const Scalar r = random_scalar(rng);
  const Point pub = base_mult(r);
  for (std::size_t len : {0u, 1u, 255u, 4096u}) {
    const Bytes m = rng.bytes(len);
    const auto ct = asym_encrypt(pub, m, rng);
    EXPECT_EQ(asym_decrypt(r, ct), m) << len;
    EXPECT_EQ(asym_decrypt(r, ct.serialize()), m) << len;
    EXPECT_EQ(HybridCiphertext::parse(ct.serialize()), ct);
  }
}

TEST(Asym, FreshEphemeralWrongKeyAndTamper) {
  auto& rng = system_random();
  const Scalar r = random_scalar(rng);
  const Point pub = base_mult(r);
  const Bytes m = {9, 8, 7};
  const auto c1 = asym_encrypt(pub, m, rng);
  const auto c2 = asym_encrypt(pub, m, rng);
  EXPECT_NE(c1.ephemeral, c2.ephemeral);
  EXPECT_NE(c1.serialize(), c2.serialize());
  EXPECT_THROW(asym_decrypt(random_scalar(rng), c1), DecryptionError);
  const Bytes wire = c1.serialize();
  for (std::size_t bit = 0; bit < wire.size() * 8; ++bit) {
    Bytes t = wire;
    t[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
    EXPECT_THROW(asym_decrypt(r, t), DecryptionError) << "bit " << bit;
  }
  EXPECT_THROW(asym_decrypt(r, Bytes(20)), DecryptionError);
}

TEST(Counters, CountOnlyInsideScope) {
  auto& rng = system_random();
  OpCounters outer, inner;
  const SymKey k = SymKey::generate(rng);
  const Scalar r = random_scalar(rng);
  const Point pub = base_mult(r);
  {
    CountingScope s(outer);
    (void)hash("x", {});
    {
      CountingScope s2(inner);
      (void)sym_encrypt(k, Bytes{1}, rng);
      (void)asym_decrypt(r, asym_encrypt(pub, Bytes{1}, rng));
      (void)xor_mask(hash("y", {}), Bytes(33));
      (void)point_add(pub, pub);
      (void)scalar_mult(r, pub);
    }
    (void)base_mult(r);
  }
  (void)hash("z", {});
  EXPECT_EQ(outer, (OpCounters{0, 0, 1, 0, 1, 0}));
  EXPECT_EQ(inner, (OpCounters{1, 2, 1, 1, 1, 1}));
}

}  // namespace
