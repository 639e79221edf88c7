// Copyright 2026 The EBAKE Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "ebake/adversary/attacks.hpp"
#include "ebake/protocol/handshake.hpp"
#include "ebake/protocol/messages.hpp"

namespace ebake::adversary {
namespace {

using codec::MsgType;
using transport::DasTestbed;
using transport::EbakeTestbed;

struct EbakeWorld : ::testing::Test {
  ManualClock clock;
  crypto::DeterministicRandom rng{99};
  EbakeTestbed tb{clock, rng};
  std::size_t x = tb.add_device("sensor-x");
  std::size_t y = tb.add_device("actuator-y");
};

std::optional<std::size_t> find_entry(const Transcript& t, MsgType type) {
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t.at(i).direction != Direction::kObserved) continue;
    if (codec::decode_envelope(t.at(i).raw).type == type) return i;
  }
  return std::nullopt;
}

TEST_F(EbakeWorld, TranscriptIsByteExactAndOrdered) {
  std::vector<Bytes> wire;
  tb.broker().subscribe("#", [&](const transport::Message& m) { wire.push_back(m.payload); });
  Adversary adv(tb.broker());
  ASSERT_TRUE(tb.initiate(x, y));
  tb.broker().run();
  ASSERT_EQ(adv.transcript().size(), 5u);
  ASSERT_EQ(wire.size(), 5u);
  for (std::size_t i = 0; i < wire.size(); ++i) {
    EXPECT_EQ(adv.transcript().at(i).raw, wire[i]);
    EXPECT_EQ(adv.transcript().at(i).direction, Direction::kObserved);
  }
  const MsgType order[] = {MsgType::kMsg1, MsgType::kMsg2, MsgType::kMsg3, MsgType::kMsg4, MsgType::kTopicNotice};
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(codec::decode_envelope(adv.transcript().at(i).raw).type, order[i]);
}

TEST_F(EbakeWorld, IdleAdversaryIsNoOp) {
  Adversary adv(tb.broker());
  auto corr = tb.initiate(x, y);
  ASSERT_TRUE(corr);
  tb.broker().run();
  ASSERT_TRUE(tb.device(x).session(corr.value()));
  ASSERT_TRUE(tb.device(y).session(corr.value()));
  EXPECT_TRUE(tb.device(x).session(corr.value())->key == tb.device(y).session(corr.value())->key);
}

TEST_F(EbakeWorld, DropAllTimesOut) {
  Adversary adv(tb.broker());
  adv.drop([](const transport::Message&) { return true; });
  auto corr = tb.initiate(x, y);
  ASSERT_TRUE(corr);
  tb.broker().run();
  EXPECT_TRUE(tb.device(x).sessions().empty());
  clock.advance(tb.config().handshake_timeout_ms() + 1);
  const auto expired = tb.device(x).expire();
  ASSERT_EQ(expired.size(), 1u);
  EXPECT_EQ(expired[0].reason, FailureReason::kTimeout);
  EXPECT_EQ(tb.broker().metrics().dropped, 1u);
}

TEST_F(EbakeWorld, ReplayWithinWindowIsProcessed) {
  Adversary adv(tb.broker());
  ASSERT_TRUE(tb.initiate(x, y));
  tb.broker().run();
  const auto idx = find_entry(adv.transcript(), MsgType::kMsg1);
  ASSERT_TRUE(idx);
  const auto before = adv.transcript().size();
  clock.advance(100);
  adv.replay(*idx);
  tb.broker().run();
  // The TA answers the replay with a fresh Msg2; only timestamps guard it.
  ASSERT_GT(adv.transcript().size(), before + 1);
  EXPECT_EQ(adv.transcript().at(before).direction, Direction::kInjected);
  EXPECT_EQ(codec::decode_envelope(adv.transcript().at(before + 1).raw).type, MsgType::kMsg2);
}

TEST_F(EbakeWorld, ReplayAfterWindowIsStale) {
  Adversary adv(tb.broker());
  ASSERT_TRUE(tb.initiate(x, y));
  tb.broker().run();
  const auto idx = find_entry(adv.transcript(), MsgType::kMsg1);
  clock.advance(tb.config().freshness_window_ms + 1);
  const auto log_before = tb.ta().failure_log().size();
  adv.replay(*idx);
  tb.broker().run();
  const auto log = tb.ta().failure_log();
  ASSERT_EQ(log.size(), log_before + 1);
  EXPECT_EQ(log.back().reason, FailureReason::kStaleTimestamp);
}

TEST_F(EbakeWorld, CorruptionYieldsNoSecrets) {
  Adversary adv(tb.broker());
  const auto c = adv.corrupt_device(tb.device(x));
  EXPECT_FALSE(c.has_secrets());
  EXPECT_EQ(c.public_data.at("inbox_topic"), tb.device(x).inbox_topic());
  EXPECT_EQ(adv.corrupted().size(), 1u);
  EXPECT_THROW(adv.corrupt_device(tb.ta()), CorruptionRefused);
  EXPECT_EQ(adv.corrupted().size(), 1u);
}

TEST(DasCorruption, TupleForgesAcceptedMsg1) {
  ManualClock clock;
  crypto::DeterministicRandom rng(3), adv_rng(4);
  DasTestbed tb(clock, rng);
  const auto x = tb.add_device("das-x");
  const auto y = tb.add_device("das-y");
  Adversary adv(tb.broker());
  EXPECT_TRUE(adv.corrupted().empty());
  const auto c = adv.corrupt_device(tb.device(x));
  ASSERT_TRUE(c.has_secrets());
  EXPECT_TRUE(c.das_state->pr == tb.device(x).state().pr);
  EXPECT_EQ(c.das_state->id, tb.device(x).id());
  const auto forged = das::das_msg1(*c.das_state, clock.now_ms(), adv_rng);
  EXPECT_TRUE(das::das_msg2(tb.device(y).state(), forged.msg, clock.now_ms(), 5000, adv_rng));
}

void expect_deterministic(AttackKind k, Scheme s) {
  AttackOptions opts;
  opts.seed = 42;
  EXPECT_EQ(run_attack(k, s, opts).to_json(), run_attack(k, s, opts).to_json())
      << attack_name(k) << "/" << transport::scheme_name(s);
}

TEST(Attacks, DeterministicUnderSeed) {
  for (auto s : {Scheme::kDas, Scheme::kEbake}) {
    for (auto k : {AttackKind::kTrace, AttackKind::kImpersonate, AttackKind::kMitm, AttackKind::kDos}) {
      expect_deterministic(k, s);
    }
  }
}

TEST(Attacks, OutcomeMatrixAcrossSeeds) {
  for (std::uint64_t seed : {1, 2, 3}) {
    AttackOptions opts;
    opts.seed = seed;
    for (auto k : {AttackKind::kTrace, AttackKind::kImpersonate, AttackKind::kMitm, AttackKind::kDos}) {
      EXPECT_TRUE(run_attack(k, Scheme::kDas, opts).success) << attack_name(k) << " seed " << seed;
      EXPECT_FALSE(run_attack(k, Scheme::kEbake, opts).success) << attack_name(k) << " seed " << seed;
    }
  }
}

TEST(Attacks, Names) {
  EXPECT_EQ(parse_attack("mitm"), AttackKind::kMitm);
  EXPECT_EQ(parse_attack("dos"), AttackKind::kDos);
  EXPECT_FALSE(parse_attack("bogus"));
  const auto j = run_attack(AttackKind::kTrace, Scheme::kDas, {}).to_json();
  for (const char* key : {"attack", "scheme", "outcome", "evidence", "steps"}) EXPECT_TRUE(j.contains(key)) << key;
}

TEST(TraceAttack, DasRecoversAndLinksIdentities) {
  AttackOptions opts;
  opts.sessions = 3;
  const auto r = attack_trace(Scheme::kDas, opts);
  ASSERT_TRUE(r.success);
  const auto& ids = r.evidence["identities"];
  ASSERT_EQ(ids.size(), 3u);
  for (const auto& id : ids) EXPECT_EQ(id["linked_sessions"], 2);
}

TEST(TraceAttack, EbakeTranscriptHasNoIdentityBytes) {
  const auto r = attack_trace(Scheme::kEbake, {});
  EXPECT_FALSE(r.success);
  EXPECT_TRUE(r.evidence["identity_hits"].empty());
}

TEST(TraceAttack, EmptyTranscript) {
  const auto r = attack_trace_identity(Scheme::kDas, Transcript{}, {});
  EXPECT_FALSE(r.success);
  EXPECT_EQ(r.evidence["note"], "no data");
}

TEST(TraceAttack, ScannerFindsPlantedIdentity) {
  Transcript t;
  const auto id = DeviceId::from_label("planted");
  t.append({Direction::kObserved, "a/b", Bytes{1, 2, 3}, 0});
  Bytes raw{9, 9};
  raw.insert(raw.end(), id.bytes.begin(), id.bytes.end());
  t.append({Direction::kObserved, "x", raw, 0});
  t.append({Direction::kObserved, "dev/" + id.hex(), {}, 0});
  t.append({Direction::kObserved, "y", Bytes(as_view("hello planted").begin(), as_view("hello planted").end()), 0});
  const auto hits = scan_identities(t, {id});
  // The zero-padded label is also visible inside the raw id bytes.
  ASSERT_EQ(hits.size(), 4u);
  EXPECT_EQ(hits[0].entry, 1u);
  EXPECT_EQ(hits[0].form, "raw");
  EXPECT_EQ(hits[1].entry, 1u);
  EXPECT_EQ(hits[1].form, "label");
  EXPECT_TRUE(hits[2].in_topic);
  EXPECT_EQ(hits[2].form, "hex");
  EXPECT_EQ(hits[3].entry, 3u);
  EXPECT_EQ(hits[3].form, "label");
}

TEST(ImpersonateAttack, DasVerdicts) {
  const auto r = attack_impersonate(Scheme::kDas, {});
  ASSERT_TRUE(r.success);
  const auto& v = r.evidence["verdicts"];
  EXPECT_EQ(v[0]["variant"], "stale-z-fresh-r");
  EXPECT_FALSE(v[0]["accepted"].get<bool>());
  EXPECT_TRUE(v[0]["certificate_check"].get<bool>());
  EXPECT_FALSE(v[0]["z_check"].get<bool>());
  EXPECT_TRUE(v[1]["accepted"].get<bool>());
  EXPECT_FALSE(v[2]["accepted"].get<bool>());
  EXPECT_EQ(v[2]["failure"]["reason"], "stale-timestamp");
}

TEST(ImpersonateAttack, EbakeRejectsAtW) {
  const auto r = attack_impersonate(Scheme::kEbake, {});
  EXPECT_FALSE(r.success);
  EXPECT_FALSE(r.evidence["extracted"]["secrets"].get<bool>());
  const auto& v = r.evidence["verdicts"];
  EXPECT_EQ(v[0]["failure"]["reason"], "authentication-failed");
  EXPECT_EQ(v[1]["failure"]["reason"], "verifier-mismatch");
  EXPECT_EQ(v[2]["failure"]["reason"], "stale-timestamp");
}

TEST(MitmAttack, DasDivergentKeys) {
  const auto r = attack_mitm(Scheme::kDas, {});
  ASSERT_TRUE(r.success);
  const auto& skv_only = r.evidence["variants"][0];
  EXPECT_FALSE(skv_only["initiator_completed"].get<bool>());
  const auto& full = r.evidence["variants"][1];
  EXPECT_TRUE(full["initiator_completed"].get<bool>());
  EXPECT_TRUE(full["divergent_keys"].get<bool>());
  EXPECT_TRUE(full["adversary_shares_initiator_key"].get<bool>());
  EXPECT_NE(full["initiator_fingerprint"], full["responder_fingerprint"]);
}

TEST(MitmAttack, EbakeHonestEndpointRejects) {
  const auto r = attack_mitm(Scheme::kEbake, {});
  EXPECT_FALSE(r.success);
  std::map<std::string, nlohmann::json> by_name;
  for (const auto& v : r.evidence["variants"]) by_name[v["variant"]] = v;
  EXPECT_TRUE(by_name.at("pass-through")["responder_completed"].get<bool>());
  EXPECT_EQ(by_name.at("pass-through")["initiator_fingerprint"], by_name.at("pass-through")["responder_fingerprint"]);
  EXPECT_EQ(by_name.at("swap-z-in-msg2")["responder_failure"]["detail"], "P_dy does not verify");
  EXPECT_EQ(by_name.at("swap-zy-in-msg3")["ta_failure"]["detail"], "P_dTA does not verify");
  EXPECT_EQ(by_name.at("swap-zy-in-msg4")["initiator_failure"]["detail"], "P_dxx does not verify");
  EXPECT_EQ(by_name.at("forge-pdxx")["initiator_failure"]["detail"], "P_dxx does not verify");
  for (const auto& [name, v] : by_name) {
    EXPECT_FALSE(v["divergent_keys"].get<bool>()) << name;
    if (name != "pass-through") {
      EXPECT_FALSE(v["initiator_completed"].get<bool>()) << name;
    }
  }
}

TEST(DosAttack, DasProcessesEverything) {
  const auto r = attack_dos_flood(Scheme::kDas, {});
  EXPECT_TRUE(r.success);
  EXPECT_EQ(r.evidence["full_verifications"], 100);
  EXPECT_FALSE(r.evidence["mitigated"].get<bool>());
}

TEST(DosAttack, EbakeBlocksAfterThree) {
  const auto r = attack_dos_flood(Scheme::kEbake, {});
  EXPECT_FALSE(r.success);
  EXPECT_EQ(r.evidence["full_verifications"], 3);
  EXPECT_EQ(r.evidence["refused_without_verification"], 97);
  EXPECT_EQ(r.evidence["blocked_for_ms"], 86'400'000);
  EXPECT_TRUE(r.evidence["refused_1ms_before_expiry"].get<bool>());
  EXPECT_TRUE(r.evidence["verified_again_after_expiry"].get<bool>());
}

TEST(DosAttack, EmptyFlood) {
  AttackOptions opts;
  opts.flood_count = 0;
  for (auto s : {Scheme::kDas, Scheme::kEbake}) {
    const auto r = attack_dos_flood(s, opts);
    EXPECT_FALSE(r.success);
    EXPECT_EQ(r.evidence["sent"], 0);
    EXPECT_EQ(r.evidence["note"], "empty flood");
  }
}

// Nonces never appear on the wire in the clear; the intended recipient finds
// them inside the hybrid ciphertext bodies. An insider TA that also opens
// Z_y with r_dx from W still cannot reproduce SK.
TEST(KeyBlindness, NoncesOnlyInsideCiphertexts) {
  ManualClock clock;
  crypto::DeterministicRandom rng(11);
  EbakeTestbed tb(clock, rng);
  const auto x = tb.add_device("sensor-x");
  const auto y = tb.add_device("actuator-y");
  Adversary adv(tb.broker());
  for (int run = 0; run < 60; ++run) {
    const auto start = adv.transcript().size();
    auto corr = tb.initiate(x, y);
    ASSERT_TRUE(corr);
    const Bytes n_x = tb.device(x).initiator_pending().at(corr.value()).nonce;
    tb.broker().run();
    const auto sk = tb.device(x).session(corr.value());
    ASSERT_TRUE(sk);

    Transcript run_t;
    for (std::size_t i = start; i < adv.transcript().size(); ++i) run_t.append(adv.transcript().at(i));
    std::optional<Bytes> n_y;
    bool n_x_in_z = false;
    for (const auto& f : ciphertext_fields(run_t)) {
      if (f.name == "Z" && f.type == MsgType::kMsg2) {
        n_x_in_z = protocol::decode_initiator_secret(tb.device(y).secure_element().open(f.body)).n_x == n_x;
      }
      if (f.name == "Z_y" && f.type == MsgType::kMsg4) {
        n_y = protocol::decode_responder_secret(tb.device(x).secure_element().open(f.body)).n_y;
      }
    }
    EXPECT_TRUE(n_x_in_z);
    ASSERT_TRUE(n_y);
    for (const auto& e : run_t.entries()) {
      EXPECT_FALSE(contains(e.raw, n_x));
      EXPECT_FALSE(contains(e.raw, *n_y));
      EXPECT_FALSE(contains(as_view(e.topic), n_x));
    }

    const auto rogue = rogue_ta_candidates(tb.ta(), run_t, corr.value());
    EXPECT_TRUE(rogue.recovered_n_y);
    ASSERT_GE(rogue.candidates.size(), 9u);
    for (const auto& [name, cand] : rogue.candidates) EXPECT_FALSE(cand == sk->key) << name;
  }
}

// Random Dolev-Yao interference: flips, truncations, cross-handshake
// substitutions, drops and replays. Whatever completes must agree.
TEST(DolevYao, NoKeyConfusionUnderRandomInterference) {
  std::size_t completed = 0, interfered = 0;
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    ManualClock clock;
    crypto::DeterministicRandom rng(seed), adv_rng(seed * 7919);
    protocol::ProtocolConfig cfg;
    cfg.failure_threshold = 1'000'000;
    EbakeTestbed tb(clock, rng, {}, cfg);
    const auto x = tb.add_device("sensor-x");
    const auto y = tb.add_device("actuator-y");
    const auto z = tb.add_device("relay-z");
    Adversary adv(tb.broker());
    std::vector<transport::Message> pool;
    adv.rewrite([&](transport::Message& m) {
      pool.push_back(m);
      const auto roll = adv_rng.uniform(0, 9);
      if (roll >= 6 || m.payload.empty()) return false;
      ++interfered;
      if (roll <= 2) {
        m.payload[adv_rng.uniform(0, m.payload.size() - 1)] ^= static_cast<std::uint8_t>(1u << adv_rng.uniform(0, 7));
      } else if (roll == 3) {
        m.payload.resize(adv_rng.uniform(0, m.payload.size() - 1));
      } else {
        m.payload = pool[adv_rng.uniform(0, pool.size() - 1)].payload;
      }
      return true;
    });
    adv.drop([&](const transport::Message&) { return adv_rng.uniform(0, 19) == 0; });
    std::vector<codec::CorrelationId> corrs;
    for (int i = 0; i < 6; ++i) {
      const std::size_t from = i % 3, to = (i + 1) % 3;
      if (auto c = tb.initiate(from, to)) corrs.push_back(c.value());
      if (adv_rng.uniform(0, 1) == 0 && adv.transcript().size() > 0) {
        adv.replay(adv_rng.uniform(0, adv.transcript().size() - 1));
      }
      tb.broker().run();
    }
    for (const auto& c : corrs) {
      for (std::size_t a : {x, y, z}) {
        const auto ini = tb.device(a).session(c);
        if (!ini || ini->role != protocol::Role::kInitiator) continue;
        for (std::size_t b : {x, y, z}) {
          if (b == a) continue;
          if (const auto rk = tb.device(b).responder_key(c)) {
            EXPECT_TRUE(*rk == ini->key) << "seed " << seed;
          }
          if (const auto rs = tb.device(b).session(c); rs && rs->role == protocol::Role::kResponder) {
            ++completed;
            EXPECT_TRUE(rs->key == ini->key) << "seed " << seed;
          }
        }
      }
    }
  }
  EXPECT_GT(interfered, 0u);
  EXPECT_GT(completed, 0u);
}

}  // namespace
}  // namespace ebake::adversary
