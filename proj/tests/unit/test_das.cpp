// Copyright 2026 The EBAKE Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "ebake/crypto/counters.hpp"
#include "ebake/das/das.hpp"

namespace {

using namespace ebake;
using namespace ebake::das;
using crypto::Point;
using crypto::Scalar;

constexpr std::uint64_t kWindow = 5'000;
constexpr std::uint64_t kNow = 1'700'000'000'000ull;

DeviceId dev(std::string_view s) { return DeviceId::from_label(s); }

struct Pair {
  explicit Pair(std::uint64_t seed = 1)
      : rng(seed), ta(rng), x(ta.register_device(dev("das-x"))), y(ta.register_device(dev("das-y"))) {}
  crypto::DeterministicRandom rng;
  Authority ta;
  DeviceState x;
  DeviceState y;
};

TEST(DasSetup, PublicKeyMatchesPrivate) {
  crypto::DeterministicRandom rng(1);
  const Scalar pr = crypto::random_scalar(rng);
  Authority ta(pr, rng);
  EXPECT_EQ(ta.pub_ta(), crypto::base_mult(pr));
}

TEST(DasSetup, DistinctKeys) {
  crypto::SystemRandom rng;
  Authority a(rng), b(rng);
  EXPECT_FALSE(a.pub_ta() == b.pub_ta());
}

TEST(DasSetup, ParamsRoundtrip) {
  crypto::DeterministicRandom rng(2);
  Authority ta(rng);
  EXPECT_EQ(SystemParams::parse(ta.params().serialize()), ta.params());
  Bytes bad = ta.params().serialize();
  bad.pop_back();
  EXPECT_THROW(SystemParams::parse(bad), codec::ParseError);
}

TEST(DasRegister, CertificateHolds) {
  Pair p;
  EXPECT_TRUE(certificate_holds(p.ta.params(), p.x.id, p.x.a, p.x.c));
  EXPECT_EQ(p.x.pub, crypto::base_mult(p.x.pr));
}

TEST(DasRegister, DynamicAdditionPassesSameCheck) {
  Pair p;
  const auto replacement = p.ta.add_device(dev("das-x2"), p.x.id);
  EXPECT_TRUE(certificate_holds(p.ta.params(), replacement.id, replacement.a, replacement.c));
  EXPECT_FALSE(p.ta.is_registered(p.x.id));
  EXPECT_TRUE(p.ta.is_registered(replacement.id));
  // A replacement device completes a handshake like any other.
  auto m1 = das_msg1(replacement, kNow, p.rng);
  auto m2 = das_msg2(p.y, m1.msg, kNow, kWindow, p.rng);
  ASSERT_TRUE(m2);
  auto m3 = das_msg3(replacement, m1.pending, m2.value().msg, kNow, kWindow);
  ASSERT_TRUE(m3);
  EXPECT_TRUE(m3.value().sk == m2.value().pending.sk);
}

TEST(DasRegister, TamperedFieldsFailCertificate) {
  Pair p;
  EXPECT_FALSE(certificate_holds(p.ta.params(), p.x.id, crypto::point_add(p.x.a, crypto::generator()), p.x.c));
  EXPECT_FALSE(certificate_holds(p.ta.params(), p.x.id, p.x.a, p.x.c.add(Scalar::from_u64(1))));
  EXPECT_FALSE(certificate_holds(p.ta.params(), p.y.id, p.x.a, p.x.c));
  SystemParams other = p.ta.params();
  other.pub_ta = crypto::point_add(other.pub_ta, crypto::generator());
  EXPECT_FALSE(certificate_holds(other, p.x.id, p.x.a, p.x.c));
}

TEST(DasRegister, DuplicateRejected) {
  Pair p;
  EXPECT_THROW(p.ta.register_device(dev("das-x")), RegistrationError);
}

TEST(DasMsg1, SignatureAlgebra) {
  Pair p;
  const auto m = das_msg1(p.x, kNow, p.rng).msg;
  const Scalar h = z_challenge(m.a_x, m.c_x, m.r_x, m.pub_x, m.ts_x);
  const Point lhs = crypto::base_mult(m.z_x);
  const Point rhs = crypto::point_add(crypto::base_mult(m.c_x), crypto::scalar_mult(h, crypto::point_add(m.r_x, m.pub_x)));
  EXPECT_EQ(lhs, rhs);
}

TEST(DasMsg1, IdentityTravelsInClear) {
  Pair p;
  const auto m = das_msg1(p.x, kNow, p.rng).msg;
  EXPECT_TRUE(contains(m.to_payload(), p.x.id.bytes));
}

TEST(DasMsg1, FreshEphemeral) {
  Pair p;
  EXPECT_FALSE(das_msg1(p.x, kNow, p.rng).msg.r_x == das_msg1(p.x, kNow, p.rng).msg.r_x);
}

TEST(DasMsg1, CodecRoundtrip) {
  Pair p;
  const auto m = das_msg1(p.x, kNow, p.rng).msg;
  EXPECT_EQ(Msg1::from_payload(m.to_payload()).to_payload(), m.to_payload());
  auto m2 = das_msg2(p.y, m, kNow, kWindow, p.rng).value().msg;
  EXPECT_EQ(Msg2::from_payload(m2.to_payload()).to_payload(), m2.to_payload());
}

TEST(DasMsg2, HonestAccepted) {
  Pair p;
  auto m1 = das_msg1(p.x, kNow, p.rng);
  auto m2 = das_msg2(p.y, m1.msg, kNow + 10, kWindow, p.rng);
  ASSERT_TRUE(m2) << m2.failure().detail;
  EXPECT_TRUE(das_msg3(p.x, m1.pending, m2.value().msg, kNow + 20, kWindow));
}

TEST(DasMsg2, CapturedStateForgesAcceptedMsg1) {
  // With the extracted tuple the adversary signs a fresh (r_c, TS_c) itself.
  Pair p;
  crypto::DeterministicRandom adversary(99);
  const DeviceState captured = p.x;
  const std::uint64_t ts_c = kNow + 60'000;
  const auto forged = das_msg1(captured, ts_c, adversary);
  auto r = das_msg2(p.y, forged.msg, ts_c, kWindow, p.rng);
  ASSERT_TRUE(r);
  EXPECT_EQ(r.value().pending.peer, p.x.id);
}

TEST(DasMsg2, ReusedSignatureWithFreshEphemeralRejected) {
  // Captured z_x reused verbatim next to a new R_c and TS_c: the challenge
  // hash covers R and TS, so the signature no longer matches.
  Pair p;
  crypto::DeterministicRandom adversary(98);
  auto m = das_msg1(p.x, kNow, p.rng).msg;
  m.r_x = crypto::base_mult(crypto::random_scalar(adversary));
  m.ts_x = kNow + 1;
  auto r = das_msg2(p.y, m, kNow + 1, kWindow, p.rng);
  ASSERT_FALSE(r);
  EXPECT_EQ(r.reason(), FailureReason::kVerifierMismatch);
}

TEST(DasMsg2, StaleRejected) {
  Pair p;
  auto m1 = das_msg1(p.x, kNow, p.rng);
  auto r = das_msg2(p.y, m1.msg, kNow + kWindow + 1, kWindow, p.rng);
  ASSERT_FALSE(r);
  EXPECT_EQ(r.reason(), FailureReason::kStaleTimestamp);
}

TEST(DasMsg3, KeysAgree) {
  Pair p;
  auto m1 = das_msg1(p.x, kNow, p.rng);
  auto m2 = das_msg2(p.y, m1.msg, kNow, kWindow, p.rng).value();
  auto m3 = das_msg3(p.x, m1.pending, m2.msg, kNow, kWindow).value();
  EXPECT_TRUE(m3.sk == m2.pending.sk);
  auto accepted = das_msg3_verify(m2.pending, m3.msg, kNow, kWindow);
  ASSERT_TRUE(accepted);
  EXPECT_TRUE(accepted.value() == m3.sk);
}

TEST(DasMsg3, SubstitutedKeysAndSignatureAcceptedWithAdversaryKey) {
  // The adversary keeps ID_y, A_y, c_y (certificate intact), swaps in its own
  // Pub_c and R_c, signs z with them and recomputes SKV.
  Pair p;
  crypto::DeterministicRandom adversary(7);
  auto m1 = das_msg1(p.x, kNow, p.rng);
  auto honest = das_msg2(p.y, m1.msg, kNow, kWindow, p.rng).value();
  const Scalar x_c = crypto::random_scalar(adversary), r_c = crypto::random_scalar(adversary);
  Msg2 forged = honest.msg;
  forged.pub_y = crypto::base_mult(x_c);
  forged.r_y = crypto::base_mult(r_c);
  forged.z_y = sign_z(forged.c_y, z_challenge(forged.a_y, forged.c_y, forged.r_y, forged.pub_y, forged.ts_y), r_c, x_c);
  const auto sk_c = session_key(crypto::scalar_mult(r_c, m1.msg.r_x), crypto::scalar_mult(x_c, m1.msg.pub_x),
                                forged.ts_y, m1.msg.ts_x, m1.msg.id_x, forged.id_y);
  forged.skv = skv(sk_c, forged.ts_y);
  auto r = das_msg3(p.x, m1.pending, forged, kNow, kWindow);
  ASSERT_TRUE(r);
  EXPECT_TRUE(r.value().sk == sk_c);
  EXPECT_FALSE(r.value().sk == honest.pending.sk);
}

TEST(DasMsg3, SkvOnlyReplacementRejected) {
  // Replacing SKV alone leaves D_x computing its key from D_y's Pub/R.
  Pair p;
  crypto::DeterministicRandom adversary(8);
  auto m1 = das_msg1(p.x, kNow, p.rng);
  auto m2 = das_msg2(p.y, m1.msg, kNow, kWindow, p.rng).value().msg;
  const Scalar x_c = crypto::random_scalar(adversary), r_c = crypto::random_scalar(adversary);
  const auto sk_c = session_key(crypto::scalar_mult(r_c, m1.msg.r_x), crypto::scalar_mult(x_c, m1.msg.pub_x),
                                m2.ts_y, m1.msg.ts_x, m1.msg.id_x, m2.id_y);
  m2.skv = skv(sk_c, m2.ts_y);
  auto r = das_msg3(p.x, m1.pending, m2, kNow, kWindow);
  ASSERT_FALSE(r);
  EXPECT_EQ(r.reason(), FailureReason::kVerifierMismatch);
}

TEST(DasMsg3, WrongSkvRejected) {
  Pair p;
  auto m1 = das_msg1(p.x, kNow, p.rng);
  auto m2 = das_msg2(p.y, m1.msg, kNow, kWindow, p.rng).value().msg;
  m2.skv.bytes[3] ^= 0x10;
  EXPECT_FALSE(das_msg3(p.x, m1.pending, m2, kNow, kWindow));
}

TEST(DasMsg3Verify, FlippedAndStaleRejected) {
  Pair p;
  auto m1 = das_msg1(p.x, kNow, p.rng);
  auto m2 = das_msg2(p.y, m1.msg, kNow, kWindow, p.rng).value();
  auto m3 = das_msg3(p.x, m1.pending, m2.msg, kNow, kWindow).value().msg;
  auto flipped = m3;
  flipped.skv.bytes[0] ^= 1;
  EXPECT_FALSE(das_msg3_verify(m2.pending, flipped, kNow, kWindow));
  EXPECT_EQ(das_msg3_verify(m2.pending, m3, kNow + kWindow + 1, kWindow).reason(), FailureReason::kStaleTimestamp);
}

TEST(DasProperties, KeyAgreementRandomized) {
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    Pair p(seed);
    const std::uint64_t t = kNow + seed * 13;
    auto m1 = das_msg1(p.x, t, p.rng);
    auto m2 = das_msg2(p.y, m1.msg, t + 3, kWindow, p.rng);
    ASSERT_TRUE(m2);
    auto m3 = das_msg3(p.x, m1.pending, m2.value().msg, t + 6, kWindow);
    ASSERT_TRUE(m3);
    EXPECT_TRUE(m3.value().sk == m2.value().pending.sk);
    // ECDH symmetry underneath: Pr_x.Pub_y == Pr_y.Pub_x.
    EXPECT_EQ(crypto::scalar_mult(p.x.pr, p.y.pub), crypto::scalar_mult(p.y.pr, p.x.pub));
  }
}

TEST(DasProperties, EphemeralSymmetry) {
  crypto::DeterministicRandom rng(3);
  for (int i = 0; i < 100; ++i) {
    const Scalar rx = crypto::random_scalar(rng), ry = crypto::random_scalar(rng);
    EXPECT_EQ(crypto::scalar_mult(rx, crypto::base_mult(ry)), crypto::scalar_mult(ry, crypto::base_mult(rx)));
  }
}

TEST(DasProperties, ZAlgebraBothDirections) {
  Pair p;
  crypto::DeterministicRandom rng(4);
  for (int i = 0; i < 50; ++i) {
    const Scalar r = crypto::random_scalar(rng);
    const Point big_r = crypto::base_mult(r);
    const std::uint64_t ts = kNow + static_cast<std::uint64_t>(i);
    const Scalar z = sign_z(p.x.c, z_challenge(p.x.a, p.x.c, big_r, p.x.pub, ts), r, p.x.pr);
    EXPECT_TRUE(z_holds(p.x.a, p.x.c, z, big_r, p.x.pub, ts));
    EXPECT_FALSE(z_holds(p.x.a, p.x.c, crypto::random_scalar(rng), big_r, p.x.pub, ts));
    EXPECT_FALSE(z_holds(p.x.a, p.x.c, z, big_r, p.x.pub, ts + 1));
  }
}

TEST(DasProperties, OperationCounts) {
  Pair p;
  crypto::OpCounters cx, cy;
  Msg1Result m1 = [&] { crypto::CountingScope s(cx); return das_msg1(p.x, kNow, p.rng); }();
  auto m2 = [&] { crypto::CountingScope s(cy); return das_msg2(p.y, m1.msg, kNow, kWindow, p.rng).value(); }();
  auto m3 = [&] { crypto::CountingScope s(cx); return das_msg3(p.x, m1.pending, m2.msg, kNow, kWindow).value(); }();
  {
    crypto::CountingScope s(cy);
    ASSERT_TRUE(das_msg3_verify(m2.pending, m3.msg, kNow, kWindow));
  }
#if EBAKE_ENABLE_OP_COUNTERS
  for (const auto* c : {&cx, &cy}) {
    EXPECT_EQ(c->point_mul, 7u);
    EXPECT_EQ(c->point_add, 3u);
    EXPECT_EQ(c->hash, 6u);
    EXPECT_EQ(c->sym + c->asym + c->xor_ops, 0u);
  }
#else
  GTEST_SKIP() << "operation counters compiled out";
#endif
}

TEST(DasDevice, MessageDrivenHandshake) {
  crypto::DeterministicRandom rng(5);
  Authority ta(rng);
  ManualClock clock;
  Device x(ta.register_device(dev("dx")), kWindow, clock, rng);
  Device y(ta.register_device(dev("dy")), kWindow, clock, rng);
  const auto m1 = x.initiate(y.id());
  EXPECT_EQ(m1.topic, y.topic());
  auto r2 = y.handle(codec::encode_envelope(m1.envelope));
  ASSERT_EQ(r2.outbound.size(), 1u);
  auto r3 = x.handle(codec::encode_envelope(r2.outbound[0].envelope));
  ASSERT_TRUE(r3.established);
  auto r4 = y.handle(codec::encode_envelope(r3.outbound.at(0).envelope));
  ASSERT_TRUE(r4.established);
  EXPECT_TRUE(r3.established->key == r4.established->key);
  EXPECT_EQ(y.verifications(), 2u);
}

TEST(DasDevice, GarbageNeverThrows) {
  crypto::DeterministicRandom rng(6);
  Authority ta(rng);
  ManualClock clock;
  Device x(ta.register_device(dev("dx")), kWindow, clock, rng);
  for (int i = 0; i < 300; ++i) EXPECT_NO_THROW(x.handle(rng.bytes(rng.uniform(0, 400))));
}

}  // namespace
