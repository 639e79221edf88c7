// Copyright 2026 The EBAKE Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "ebake/adversary/attacks.hpp"

#include <map>
#include <set>

#include "ebake/crypto/cipher.hpp"
#include "ebake/protocol/handshake.hpp"
#include "ebake/protocol/messages.hpp"

namespace ebake::adversary {

using codec::MsgType;
using crypto::Digest;
using nlohmann::json;
using transport::DasTestbed;
using transport::EbakeTestbed;

namespace {

constexpr std::uint64_t kAdversarySalt = 0xad5e'0000'0000'0001ull;

std::optional<codec::Envelope> try_envelope(ByteView raw) {
  try {
    return codec::decode_envelope(raw);
  } catch (const codec::ParseError&) {
    return std::nullopt;
  }
}

codec::CorrelationId random_correlation(crypto::RandomSource& rng) {
  codec::CorrelationId c{};
  rng.fill(c);
  return c;
}

Digest random_digest(crypto::RandomSource& rng) {
  Digest d;
  rng.fill(d.bytes);
  return d;
}

Bytes envelope_bytes(MsgType type, const codec::CorrelationId& corr, const std::string& hint, Bytes payload) {
  return codec::encode_envelope(codec::Envelope{type, corr, hint, std::move(payload)});
}

/// Applies `f` to a payload of the given type on `topic`, re-encoding the
/// envelope. Returns whether the message was changed.
template <class M, class F>
bool rewrite_payload(transport::Message& m, const std::string& topic, MsgType type, F f) {
  if (m.topic != topic) return false;
  auto env = try_envelope(m.payload);
  if (!env || env->type != type) return false;
  M msg = M::from_payload(env->payload);
  f(msg, *env);
  env->payload = msg.to_payload();
  m.payload = codec::encode_envelope(*env);
  return true;
}

template <class M>
std::optional<std::pair<M, codec::Envelope>> find_message(const Transcript& t, MsgType type,
                                                          std::optional<codec::CorrelationId> corr = {}) {
  for (const auto& e : t.entries()) {
    if (e.direction != Direction::kObserved) continue;
    auto env = try_envelope(e.raw);
    if (!env || env->type != type) continue;
    if (corr && env->correlation != *corr) continue;
    try {
      return std::make_pair(M::from_payload(env->payload), *env);
    } catch (const codec::ParseError&) {
    }
  }
  return std::nullopt;
}

std::string fp(const Digest& d) { return protocol::key_fingerprint(d); }

json failure_json(const std::optional<Failure>& f) {
  if (!f) return nullptr;
  return json{{"reason", reason_name(f->reason)}, {"detail", f->detail}};
}

template <class V>
std::optional<Failure> newest_since(const V& failures, std::size_t before) {
  if (failures.size() <= before) return std::nullopt;
  return failures.back();
}

AttackReport make_report(AttackKind kind, Scheme scheme) {
  AttackReport r;
  r.attack = std::string(attack_name(kind));
  r.scheme = scheme;
  return r;
}

// ---------------------------------------------------------------- tracing

void run_honest_sessions(EbakeTestbed& tb, std::size_t sessions) {
  for (std::size_t i = 0; i < sessions; ++i) {
    (void)tb.initiate(i % tb.size(), (i + 1) % tb.size());
    tb.broker().run();
  }
}

void run_honest_sessions(DasTestbed& tb, std::size_t sessions) {
  for (std::size_t i = 0; i < sessions; ++i) {
    tb.initiate(i % tb.size(), (i + 1) % tb.size());
    tb.broker().run();
  }
}

// ---------------------------------------------------------------- impersonation

struct InjectVerdict {
  bool accepted = false;
  std::optional<Failure> failure;
};

AttackReport impersonate_das(const AttackOptions& opts) {
  auto report = make_report(AttackKind::kImpersonate, Scheme::kDas);
  ManualClock clock;
  crypto::DeterministicRandom rng(opts.seed), adv_rng(opts.seed ^ kAdversarySalt);
  const std::uint64_t window = opts.protocol.freshness_window_ms;
  DasTestbed tb(clock, rng, {}, window);
  const auto x = tb.add_device("das-victim-x");
  const auto y = tb.add_device("das-peer-y");
  Adversary adv(tb.broker());

  tb.initiate(x, y);
  tb.broker().run();
  auto captured = find_message<das::Msg1>(adv.transcript(), MsgType::kDasMsg1);
  if (!captured) {
    report.steps.push_back("no honest M1 observed");
    return report;
  }
  report.steps.push_back("observed honest M1 from " + captured->first.id_x.display());

  const auto creds = adv.corrupt_device(tb.device(x));
  report.steps.push_back("extracted stored tuple {ID, Pr, A, c, Pub, params} from " + creds.id.display());
  report.evidence["extracted"] = {{"id", creds.id.hex()},
                                  {"fields", json::array({"ID", "Pr", "A", "c", "Pub", "params"})}};

  clock.advance(2 * window);
  const std::string hint = "das/dev/adversary/inbox";

  auto inject = [&](const das::Msg1& m) {
    auto& dy = tb.device(y);
    const auto before = dy.failures().size();
    const auto corr = random_correlation(adv_rng);
    adv.inject(dy.topic(), envelope_bytes(MsgType::kDasMsg1, corr, hint, m.to_payload()));
    tb.broker().run();
    InjectVerdict v;
    v.failure = newest_since(dy.failures(), before);
    v.accepted = !v.failure && dy.responder_key(corr).has_value();
    return v;
  };

  json variants = json::array();
  bool any = false;

  // Published recipe: fresh TS_c and R_c, stale z_x from the captured M1.
  {
    das::Msg1 forged = captured->first;
    const auto r_c = crypto::random_scalar(adv_rng);
    forged.ts_x = clock.now_ms();
    forged.r_x = crypto::base_mult(r_c);
    const bool cert = das::certificate_holds(creds.das_state->params, forged.id_x, forged.a_x, forged.c_x);
    const bool z = das::z_holds(forged.a_x, forged.c_x, forged.z_x, forged.r_x, forged.pub_x, forged.ts_x);
    const auto v = inject(forged);
    any |= v.accepted;
    variants.push_back({{"variant", "stale-z-fresh-r"},
                        {"accepted", v.accepted},
                        {"certificate_check", cert},
                        {"z_check", z},
                        {"failure", failure_json(v.failure)}});
    report.steps.push_back(std::string("M1* with stale z_x and fresh R_c: ") + (v.accepted ? "accepted" : "rejected"));
  }
  // Captured Pr_x lets the adversary produce a fresh, valid signature.
  {
    const auto forged = das::das_msg1(*creds.das_state, clock.now_ms(), adv_rng).msg;
    const auto v = inject(forged);
    any |= v.accepted;
    variants.push_back({{"variant", "captured-state-resign"},
                        {"accepted", v.accepted},
                        {"failure", failure_json(v.failure)}});
    report.steps.push_back(std::string("M1* re-signed with extracted Pr_x: ") + (v.accepted ? "accepted" : "rejected"));
  }
  {
    const auto forged = das::das_msg1(*creds.das_state, clock.now_ms() - 2 * window, adv_rng).msg;
    const auto v = inject(forged);
    variants.push_back({{"variant", "expired-timestamp"},
                        {"accepted", v.accepted},
                        {"failure", failure_json(v.failure)}});
    report.steps.push_back(std::string("M1* with expired TS_c: ") + (v.accepted ? "accepted" : "rejected"));
  }
  report.evidence["verdicts"] = std::move(variants);
  report.success = any;
  return report;
}

AttackReport impersonate_ebake(const AttackOptions& opts) {
  auto report = make_report(AttackKind::kImpersonate, Scheme::kEbake);
  ManualClock clock;
  crypto::DeterministicRandom rng(opts.seed), adv_rng(opts.seed ^ kAdversarySalt);
  EbakeTestbed tb(clock, rng, {}, opts.protocol);
  const auto x = tb.add_device("sensor-x");
  const auto y = tb.add_device("actuator-y");
  Adversary adv(tb.broker());

  (void)tb.initiate(x, y);
  tb.broker().run();
  auto captured = find_message<protocol::Msg1>(adv.transcript(), MsgType::kMsg1);
  if (!captured) {
    report.steps.push_back("no honest Msg1 observed");
    return report;
  }
  report.steps.push_back("observed honest Msg1");

  const auto creds = adv.corrupt_device(tb.device(x));
  report.evidence["extracted"] = {{"id", creds.id.hex()}, {"secrets", creds.has_secrets()}};
  report.steps.push_back(std::string("corrupt_device on EBAKE device: ") +
                         (creds.has_secrets() ? "secrets extracted" : "no secrets (held in secure element)"));
  try {
    adv.corrupt_device(tb.ta());
  } catch (const CorruptionRefused& e) {
    report.steps.push_back(std::string("corrupt_device on TA refused: ") + e.what());
  }

  clock.advance(2 * opts.protocol.freshness_window_ms);
  const std::string hint = tb.device(x).inbox_topic();
  const auto& q_x = tb.device(x).secure_element().public_key();
  const auto& q_y = tb.device(y).secure_element().public_key();

  auto inject = [&](const protocol::Msg1& m) {
    auto& ta = tb.ta();
    const auto before = ta.failure_log().size();
    const auto corr = random_correlation(adv_rng);
    adv.inject(std::string(protocol::kTaInboxTopic), envelope_bytes(MsgType::kMsg1, corr, hint, m.to_payload()));
    tb.broker().run();
    InjectVerdict v;
    v.failure = newest_since(ta.failure_log(), before);
    v.accepted = !v.failure && ta.pending(corr).has_value();
    return v;
  };

  json variants = json::array();
  bool any = false;
  auto record = [&](const char* name, const InjectVerdict& v) {
    any |= v.accepted;
    variants.push_back({{"variant", name}, {"accepted", v.accepted}, {"failure", failure_json(v.failure)}});
    report.steps.push_back(std::string(name) + ": " +
                           (v.accepted ? "accepted" : "rejected (" + std::string(reason_name(v.failure->reason)) + ")"));
  };

  // Without K_dta and r_d the adversary can only guess at W and the tags;
  // Z it can build honestly, since Q_dy is public.
  {
    protocol::Msg1 m;
    const codec::Field w_fields[] = {codec::Field::id(creds.id.bytes),
                                     crypto::to_field(crypto::random_scalar(adv_rng))};
    m.w = crypto::sym_encrypt(crypto::SymKey::generate(adv_rng), codec::encode_fields(w_fields), adv_rng);
    m.y = adv_rng.bytes(protocol::kMaskedPointSize);
    m.t1 = clock.now_ms();
    m.z = crypto::asym_encrypt(q_y,
                               protocol::encode_initiator_secret(
                                   {q_x, creds.id, crypto::random_nonce(adv_rng), m.t1}),
                               adv_rng)
              .serialize();
    m.p_dx = random_digest(adv_rng);
    record("forged-w", inject(m));
  }
  {
    protocol::Msg1 m = captured->first;
    m.t1 = clock.now_ms();
    record("captured-w-fresh-t1", inject(m));
  }
  record("verbatim-replay", inject(captured->first));

  report.evidence["verdicts"] = std::move(variants);
  report.success = any;
  return report;
}

// ---------------------------------------------------------------- man in the middle

AttackReport mitm_das(const AttackOptions& opts) {
  auto report = make_report(AttackKind::kMitm, Scheme::kDas);
  ManualClock clock;
  crypto::DeterministicRandom rng(opts.seed), adv_rng(opts.seed ^ kAdversarySalt);
  DasTestbed tb(clock, rng, {}, opts.protocol.freshness_window_ms);
  const auto x = tb.add_device("das-node-x");
  const auto y = tb.add_device("das-node-y");
  Adversary adv(tb.broker());

  json variants = json::array();
  bool success = false;

  for (const bool full : {false, true}) {
    const char* name = full ? "substitute-pub-r-z-skv" : "substitute-skv-only";
    adv.clear_rules();
    std::optional<Digest> adversary_key;
    adv.rewrite([&](transport::Message& m) {
      return rewrite_payload<das::Msg2>(m, tb.device(x).topic(), MsgType::kDasMsg2, [&](das::Msg2& m2, codec::Envelope& env) {
        auto m1 = find_message<das::Msg1>(adv.transcript(), MsgType::kDasMsg1, env.correlation);
        const auto x_c = crypto::random_scalar(adv_rng), r_c = crypto::random_scalar(adv_rng);
        const auto sk_c = das::session_key(crypto::scalar_mult(r_c, m1->first.r_x),
                                           crypto::scalar_mult(x_c, m1->first.pub_x), m2.ts_y, m1->first.ts_x,
                                           m1->first.id_x, m2.id_y);
        adversary_key = sk_c;
        if (full) {
          m2.pub_y = crypto::base_mult(x_c);
          m2.r_y = crypto::base_mult(r_c);
          m2.z_y = das::sign_z(m2.c_y, das::z_challenge(m2.a_y, m2.c_y, m2.r_y, m2.pub_y, m2.ts_y), r_c, x_c);
        }
        m2.skv = das::skv(sk_c, m2.ts_y);
      });
    });
    const auto fx = tb.device(x).failures().size(), fy = tb.device(y).failures().size();
    const auto corr = tb.initiate(x, y);
    tb.broker().run();

    std::optional<Digest> ini;
    for (const auto& e : tb.device(x).sessions()) {
      if (e.correlation == corr) ini = e.key;
    }
    bool resp_done = false;
    for (const auto& e : tb.device(y).sessions()) resp_done |= e.correlation == corr;
    const auto resp_key = tb.device(y).responder_key(corr);
    const bool divergent = ini && resp_key && !(*ini == *resp_key);
    const bool adversary_shares = ini && adversary_key && *ini == *adversary_key;
    success |= full && divergent;
    json v{{"variant", name},
           {"initiator_completed", ini.has_value()},
           {"responder_completed", resp_done},
           {"divergent_keys", divergent},
           {"adversary_shares_initiator_key", adversary_shares},
           {"initiator_failure", failure_json(newest_since(tb.device(x).failures(), fx))},
           {"responder_failure", failure_json(newest_since(tb.device(y).failures(), fy))}};
    if (ini) v["initiator_fingerprint"] = fp(*ini);
    if (resp_key) v["responder_fingerprint"] = fp(*resp_key);
    variants.push_back(std::move(v));
    report.steps.push_back(std::string(name) + ": D_x " + (ini ? "completed" : "aborted") +
                           (divergent ? " with a key different from D_y's" : ""));
  }
  report.evidence["variants"] = std::move(variants);
  report.success = success;
  return report;
}

AttackReport mitm_ebake(const AttackOptions& opts) {
  auto report = make_report(AttackKind::kMitm, Scheme::kEbake);
  ManualClock clock;
  crypto::DeterministicRandom rng(opts.seed), adv_rng(opts.seed ^ kAdversarySalt);
  EbakeTestbed tb(clock, rng, {}, opts.protocol);
  const auto x = tb.add_device("sensor-x");
  const auto y = tb.add_device("actuator-y");
  Adversary adv(tb.broker());
  auto& dx = tb.device(x);
  auto& dy = tb.device(y);
  const std::string ta_inbox(protocol::kTaInboxTopic);
  const auto q_x = dx.secure_element().public_key();
  const auto q_y = dy.secure_element().public_key();

  auto fake_zy = [&](std::uint64_t t) {
    return crypto::asym_encrypt(q_x, protocol::encode_responder_secret({dy.id(), crypto::random_nonce(adv_rng), t}),
                                adv_rng)
        .serialize();
  };

  struct Variant {
    const char* name;
    std::function<void()> install;
  };
  const std::vector<Variant> variants{
      {"pass-through", [] {}},
      {"swap-z-in-msg2",
       [&] {
         adv.rewrite([&](transport::Message& m) {
           return rewrite_payload<protocol::Msg2>(m, dy.inbox_topic(), MsgType::kMsg2, [&](protocol::Msg2& m2, auto&) {
             const auto q_c = crypto::base_mult(crypto::random_scalar(adv_rng));
             m2.z = crypto::asym_encrypt(
                        q_y, protocol::encode_initiator_secret({q_c, dx.id(), crypto::random_nonce(adv_rng), m2.t2}),
                        adv_rng)
                        .serialize();
           });
         });
       }},
      {"swap-zy-in-msg3",
       [&] {
         adv.rewrite([&](transport::Message& m) {
           return rewrite_payload<protocol::Msg3>(m, ta_inbox, MsgType::kMsg3,
                                                  [&](protocol::Msg3& m3, auto&) { m3.z_y = fake_zy(m3.t3); });
         });
       }},
      {"swap-zy-in-msg4",
       [&] {
         adv.rewrite([&](transport::Message& m) {
           return rewrite_payload<protocol::Msg4>(m, dx.inbox_topic(), MsgType::kMsg4,
                                                  [&](protocol::Msg4& m4, auto&) { m4.z_y = fake_zy(m4.t4); });
         });
       }},
      {"forge-pdta",
       [&] {
         adv.rewrite([&](transport::Message& m) {
           return rewrite_payload<protocol::Msg3>(m, ta_inbox, MsgType::kMsg3,
                                                  [&](protocol::Msg3& m3, auto&) { m3.p_dta = random_digest(adv_rng); });
         });
       }},
      {"forge-pdxx",
       [&] {
         adv.rewrite([&](transport::Message& m) {
           return rewrite_payload<protocol::Msg4>(m, dx.inbox_topic(), MsgType::kMsg4,
                                                  [&](protocol::Msg4& m4, auto&) { m4.p_dxx = random_digest(adv_rng); });
         });
       }},
  };

  json out = json::array();
  bool success = false;
  for (const auto& v : variants) {
    adv.clear_rules();
    v.install();
    const auto fx = dx.failures().size(), fy = dy.failures().size(), fta = tb.ta().failure_log().size();
    auto corr = tb.initiate(x, y);
    if (!corr) {
      report.steps.push_back(std::string(v.name) + ": initiation refused (" +
                             std::string(reason_name(corr.reason())) + ")");
      continue;
    }
    tb.broker().run();
    const auto ini = dx.session(corr.value());
    const auto resp = dy.session(corr.value());
    const auto rkey = dy.responder_key(corr.value());
    const bool divergent = (ini && rkey && !(ini->key == *rkey)) || (ini && resp && !(ini->key == resp->key));
    success |= divergent;
    const auto ta_fail = newest_since(tb.ta().failure_log(), fta);
    json j{{"variant", v.name},
           {"initiator_completed", ini.has_value()},
           {"responder_completed", resp.has_value()},
           {"divergent_keys", divergent},
           {"initiator_failure", failure_json(newest_since(dx.failures(), fx))},
           {"responder_failure", failure_json(newest_since(dy.failures(), fy))},
           {"ta_failure", failure_json(ta_fail)}};
    if (ini) j["initiator_fingerprint"] = ini->fingerprint();
    if (resp) j["responder_fingerprint"] = resp->fingerprint();
    out.push_back(std::move(j));
    std::string line = std::string(v.name) + ": ";
    if (ini && resp) {
      line += divergent ? "both completed with different keys" : "both completed with equal keys";
    } else if (const auto f = newest_since(dx.failures(), fx)) {
      line += "D_x rejected (" + std::string(reason_name(f->reason)) + ")";
    } else if (const auto f2 = newest_since(dy.failures(), fy)) {
      line += "D_y rejected (" + std::string(reason_name(f2->reason)) + ")";
    } else if (ta_fail) {
      line += "TA rejected (" + std::string(reason_name(ta_fail->reason)) + ")";
    } else {
      line += "no completion";
    }
    report.steps.push_back(std::move(line));
    clock.advance(tb.config().handshake_timeout_ms() + 1);
    dx.expire();
    dy.expire();
    tb.ta().expire_pending();
  }
  report.evidence["variants"] = std::move(out);
  report.success = success;
  return report;
}

// ---------------------------------------------------------------- flooding

AttackReport dos_das(const AttackOptions& opts) {
  auto report = make_report(AttackKind::kDos, Scheme::kDas);
  ManualClock clock;
  crypto::DeterministicRandom rng(opts.seed), adv_rng(opts.seed ^ kAdversarySalt);
  DasTestbed tb(clock, rng, {}, opts.protocol.freshness_window_ms);
  const auto y = tb.add_device("das-target-y");
  Adversary adv(tb.broker());
  auto& dy = tb.device(y);
  const auto before = dy.verifications();
  const auto failed_before = dy.failures().size();
  const auto fake = DeviceId::from_label("das-forger");
  for (std::size_t i = 0; i < opts.flood_count; ++i) {
    das::Msg1 m{clock.now_ms(),
                fake,
                crypto::random_scalar(adv_rng),
                crypto::random_scalar(adv_rng),
                crypto::base_mult(crypto::random_scalar(adv_rng)),
                crypto::base_mult(crypto::random_scalar(adv_rng)),
                crypto::base_mult(crypto::random_scalar(adv_rng))};
    adv.inject(dy.topic(),
               envelope_bytes(MsgType::kDasMsg1, random_correlation(adv_rng), "das/dev/forger/inbox", m.to_payload()));
  }
  tb.broker().run();
  const auto processed = dy.verifications() - before;
  const auto rejected = dy.failures().size() - failed_before;
  report.evidence = {{"sent", opts.flood_count},
                     {"full_verifications", processed},
                     {"rejected", rejected},
                     {"refused_without_verification", 0},
                     {"mitigated", false}};
  if (opts.flood_count == 0) report.evidence["note"] = "empty flood";
  report.steps.push_back(std::to_string(opts.flood_count) + " forged M1 sent, " + std::to_string(processed) +
                         " fully verified");
  report.success = opts.flood_count > 0 && processed == opts.flood_count;
  return report;
}

AttackReport dos_ebake(const AttackOptions& opts) {
  auto report = make_report(AttackKind::kDos, Scheme::kEbake);
  ManualClock clock;
  crypto::DeterministicRandom rng(opts.seed), adv_rng(opts.seed ^ kAdversarySalt);
  EbakeTestbed tb(clock, rng, {}, opts.protocol);
  const auto y = tb.add_device("actuator-y");
  Adversary adv(tb.broker());
  auto& ta = tb.ta();
  const auto& q_y = tb.device(y).secure_element().public_key();
  const std::string hint = "ebake/dev/ffffffffffffffffffffffffffffffff/inbox";
  const auto fake = DeviceId::from_label("forger");

  auto send_forged = [&](std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
      protocol::Msg1 m;
      const codec::Field w_fields[] = {codec::Field::id(fake.bytes), crypto::to_field(crypto::random_scalar(adv_rng))};
      m.w = crypto::sym_encrypt(crypto::SymKey::generate(adv_rng), codec::encode_fields(w_fields), adv_rng);
      m.y = adv_rng.bytes(protocol::kMaskedPointSize);
      m.t1 = clock.now_ms();
      m.z = crypto::asym_encrypt(q_y, adv_rng.bytes(48), adv_rng).serialize();
      m.p_dx = random_digest(adv_rng);
      adv.inject(std::string(protocol::kTaInboxTopic),
                 envelope_bytes(MsgType::kMsg1, random_correlation(adv_rng), hint, m.to_payload()));
    }
    tb.broker().run();
  };
  auto tally = [&](std::size_t from) {
    std::pair<std::size_t, std::size_t> vr{0, 0};  // verified, refused
    const auto log = ta.failure_log();
    for (std::size_t i = from; i < log.size(); ++i) {
      (log[i].reason == FailureReason::kPeerBlocked ? vr.second : vr.first)++;
    }
    return vr;
  };

  send_forged(opts.flood_count);
  const auto [verified, refused] = tally(0);
  const bool blocked = ta.is_blocked(protocol::hint_key(hint));
  report.evidence = {{"sent", opts.flood_count},
                     {"full_verifications", verified},
                     {"refused_without_verification", refused},
                     {"blocked", blocked},
                     {"mitigated", blocked && verified < opts.flood_count}};
  report.steps.push_back(std::to_string(opts.flood_count) + " forged Msg1 sent: " + std::to_string(verified) +
                         " verified, " + std::to_string(refused) + " refused");
  if (opts.flood_count == 0) {
    report.evidence["note"] = "empty flood";
    return report;
  }
  if (blocked) {
    const auto until = ta.block_state(protocol::hint_key(hint)).blocked_until.value_or(0);
    report.evidence["blocked_for_ms"] = until - clock.now_ms();
    clock.set(until - 1);
    auto mark = ta.failure_log().size();
    send_forged(1);
    const bool still = tally(mark).second == 1;
    clock.set(until + 1);
    mark = ta.failure_log().size();
    send_forged(1);
    const bool released = tally(mark).first == 1;
    report.evidence["refused_1ms_before_expiry"] = still;
    report.evidence["verified_again_after_expiry"] = released;
    report.steps.push_back(std::string("1 ms before expiry: ") + (still ? "refused" : "processed") +
                           "; after expiry: " + (released ? "processed" : "refused"));
  }
  report.success = verified == opts.flood_count;
  return report;
}

}  // namespace

std::string_view attack_name(AttackKind k) {
  switch (k) {
    case AttackKind::kTrace:
      return "trace";
    case AttackKind::kImpersonate:
      return "impersonate";
    case AttackKind::kMitm:
      return "mitm";
    case AttackKind::kDos:
      return "dos";
  }
  return "?";
}

std::optional<AttackKind> parse_attack(std::string_view name) {
  for (auto k : {AttackKind::kTrace, AttackKind::kImpersonate, AttackKind::kMitm, AttackKind::kDos}) {
    if (attack_name(k) == name) return k;
  }
  return std::nullopt;
}

json AttackReport::to_json() const {
  return {{"attack", attack},
          {"scheme", transport::scheme_name(scheme)},
          {"outcome", outcome()},
          {"evidence", evidence},
          {"steps", steps}};
}

std::vector<IdentityHit> scan_identities(const Transcript& t, const std::vector<DeviceId>& ids) {
  std::vector<IdentityHit> hits;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const auto& e = t.at(i);
    for (const auto& id : ids) {
      const std::string hex = id.hex();
      const std::string label = id.display();
      struct Needle {
        const char* form;
        ByteView bytes;
      };
      std::vector<Needle> needles{{"raw", id.bytes}, {"hex", as_view(hex)}};
      if (label != hex && label.size() >= 3) needles.push_back({"label", as_view(label)});
      for (const auto& n : needles) {
        if (contains(e.raw, n.bytes)) hits.push_back({i, id, n.form, false});
        if (contains(as_view(e.topic), n.bytes)) hits.push_back({i, id, n.form, true});
      }
    }
  }
  return hits;
}

std::vector<CiphertextField> ciphertext_fields(const Transcript& t) {
  std::vector<CiphertextField> out;
  for (std::size_t i = 0; i < t.size(); ++i) {
    auto env = try_envelope(t.at(i).raw);
    if (!env) continue;
    try {
      switch (env->type) {
        case MsgType::kMsg1: {
          auto m = protocol::Msg1::from_payload(env->payload);
          out.push_back({i, env->type, "W", m.w});
          out.push_back({i, env->type, "Z", m.z});
          break;
        }
        case MsgType::kMsg2:
          out.push_back({i, env->type, "Z", protocol::Msg2::from_payload(env->payload).z});
          break;
        case MsgType::kMsg3:
          out.push_back({i, env->type, "Z_y", protocol::Msg3::from_payload(env->payload).z_y});
          break;
        case MsgType::kMsg4:
          out.push_back({i, env->type, "Z_y", protocol::Msg4::from_payload(env->payload).z_y});
          break;
        default:
          break;
      }
    } catch (const codec::ParseError&) {
    }
  }
  return out;
}

RogueTaAttempt rogue_ta_candidates(const protocol::TrustedAuthority& ta, const Transcript& t,
                                   const codec::CorrelationId& corr) {
  RogueTaAttempt out;
  const auto m1 = find_message<protocol::Msg1>(t, MsgType::kMsg1, corr);
  const auto m3 = find_message<protocol::Msg3>(t, MsgType::kMsg3, corr);
  const auto m4 = find_message<protocol::Msg4>(t, MsgType::kMsg4, corr);
  if (!m1 || !m3) return out;

  // Open W under whichever K_dta generation seals it.
  std::optional<crypto::SymKey> kdta;
  Bytes w_plain;
  for (std::uint32_t g = ta.kdta_generation() + 1; g-- > 0;) {
    try {
      w_plain = crypto::sym_decrypt(ta.kdta(g), m1->first.w);
      kdta = ta.kdta(g);
      break;
    } catch (const crypto::AuthenticationError&) {
    }
  }
  if (!kdta) return out;
  const auto w_fields = codec::decode_fields(w_plain);
  codec::FieldReader r(w_fields);
  const auto id_x = DeviceId::from_bytes(r.next(codec::FieldType::kId));
  const auto r_x = crypto::Scalar::from_bytes_checked(r.next(codec::FieldType::kScalar));
  const auto dp1_x = protocol::compute_dp1(id_x, r_x, *kdta);

  protocol::ResponderSecret zy;
  try {
    zy = protocol::decode_responder_secret(crypto::asym_decrypt(r_x, m3->first.z_y));
    out.recovered_n_y = true;
  } catch (const std::exception&) {
    return out;
  }
  const auto rec_y = ta.lookup(zy.id_y);
  const auto first16 = [](ByteView b) { return Bytes(b.begin(), b.begin() + std::min<std::size_t>(16, b.size())); };

  std::vector<std::pair<std::string, Bytes>> substitutes{
      {"zero", Bytes(16, 0)},
      {"p_dx", first16(m1->first.p_dx.bytes)},
      {"dp1_x", first16(dp1_x.bytes)},
      {"unmasked_y", first16(crypto::xor_mask(dp1_x, m1->first.y))},
      {"correlation", Bytes(corr.begin(), corr.end())},
      {"n_y", zy.n_y},
      {"w", first16(m1->first.w)},
      {"z", first16(m1->first.z)},
  };
  if (rec_y) substitutes.emplace_back("dp1_y", first16(rec_y->dp1.bytes));
  if (m4) substitutes.emplace_back("topic", first16(as_view(m4->first.topic)));
  for (const auto& [name, n_x] : substitutes) {
    out.candidates.emplace_back(name, protocol::derive_session_key(id_x, n_x, m1->first.t1, zy.id_y, zy.n_y, zy.t2, *kdta));
  }
  return out;
}

AttackReport attack_trace_identity(Scheme scheme, const Transcript& t, const std::vector<DeviceId>& registered) {
  auto report = make_report(AttackKind::kTrace, scheme);
  report.evidence["messages_scanned"] = t.size();
  if (t.empty()) {
    report.evidence["note"] = "no data";
    report.steps.push_back("empty transcript");
    return report;
  }
  if (scheme == Scheme::kDas) {
    std::map<DeviceId, std::set<codec::CorrelationId>> seen;
    for (const auto& e : t.entries()) {
      auto env = try_envelope(e.raw);
      if (!env) continue;
      try {
        if (env->type == MsgType::kDasMsg1) seen[das::Msg1::from_payload(env->payload).id_x].insert(env->correlation);
        if (env->type == MsgType::kDasMsg2) seen[das::Msg2::from_payload(env->payload).id_y].insert(env->correlation);
      } catch (const codec::ParseError&) {
      }
    }
    json ids = json::array();
    for (const auto& [id, sessions] : seen) {
      ids.push_back({{"id", id.hex()}, {"label", id.display()}, {"linked_sessions", sessions.size()}});
      report.steps.push_back("recovered " + id.display() + " in " + std::to_string(sessions.size()) + " session(s)");
    }
    report.evidence["identities"] = std::move(ids);
    report.success = seen.size() >= 2;
    return report;
  }
  const auto hits = scan_identities(t, registered);
  std::set<std::string> hints;
  for (const auto& e : t.entries()) {
    if (auto env = try_envelope(e.raw); env && !env->sender_hint.empty()) hints.insert(env->sender_hint);
  }
  json found = json::array();
  for (const auto& h : hits) {
    found.push_back({{"entry", h.entry}, {"id", h.id.hex()}, {"form", h.form}, {"in_topic", h.in_topic}});
  }
  report.evidence["identity_hits"] = std::move(found);
  report.evidence["identities_checked"] = registered.size();
  // Inbox aliases are stable per device: sessions of one device can be
  // grouped by alias even though the identity itself never appears.
  report.evidence["stable_inbox_aliases"] = hints.size();
  report.steps.push_back("scanned " + std::to_string(t.size()) + " messages for " +
                         std::to_string(registered.size()) + " identities: " + std::to_string(hits.size()) + " hits");
  report.success = !hits.empty();
  return report;
}

AttackReport attack_trace(Scheme scheme, const AttackOptions& opts) {
  ManualClock clock;
  crypto::DeterministicRandom rng(opts.seed);
  std::vector<DeviceId> ids;
  if (scheme == Scheme::kDas) {
    DasTestbed tb(clock, rng, {}, opts.protocol.freshness_window_ms);
    for (const char* l : {"das-node-a", "das-node-b", "das-node-c"}) tb.add_device(l);
    Adversary adv(tb.broker());
    run_honest_sessions(tb, opts.sessions);
    for (std::size_t i = 0; i < tb.size(); ++i) ids.push_back(tb.device(i).id());
    return attack_trace_identity(scheme, adv.transcript(), ids);
  }
  EbakeTestbed tb(clock, rng, {}, opts.protocol);
  for (const char* l : {"sensor-a", "sensor-b", "actuator-c"}) tb.add_device(l);
  Adversary adv(tb.broker());
  run_honest_sessions(tb, opts.sessions);
  for (std::size_t i = 0; i < tb.size(); ++i) ids.push_back(tb.device(i).id());
  return attack_trace_identity(scheme, adv.transcript(), ids);
}

AttackReport attack_impersonate(Scheme scheme, const AttackOptions& opts) {
  return scheme == Scheme::kDas ? impersonate_das(opts) : impersonate_ebake(opts);
}

AttackReport attack_mitm(Scheme scheme, const AttackOptions& opts) {
  return scheme == Scheme::kDas ? mitm_das(opts) : mitm_ebake(opts);
}

AttackReport attack_dos_flood(Scheme scheme, const AttackOptions& opts) {
  return scheme == Scheme::kDas ? dos_das(opts) : dos_ebake(opts);
}

AttackReport run_attack(AttackKind kind, Scheme scheme, const AttackOptions& opts) {
  switch (kind) {
    case AttackKind::kTrace:
      return attack_trace(scheme, opts);
    case AttackKind::kImpersonate:
      return attack_impersonate(scheme, opts);
    case AttackKind::kMitm:
      return attack_mitm(scheme, opts);
    case AttackKind::kDos:
      return attack_dos_flood(scheme, opts);
  }
  return {};
}

}  // namespace ebake::adversary
