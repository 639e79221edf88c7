// Copyright 2026 The EBAKE Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "ebake/protocol/authority.hpp"

#include "ebake/core/atomic_file.hpp"
#include "ebake/protocol/handshake.hpp"
#include "json.hpp"

namespace ebake::protocol {

using codec::Envelope;
using codec::Field;
using codec::FieldReader;
using codec::FieldType;
using codec::MsgType;
using nlohmann::json;

namespace {

constexpr int kSchemaVersion = 1;

crypto::Compressed to_compressed(ByteView b) {
  crypto::Compressed c{};
  std::copy(b.begin(), b.end(), c.begin());
  return c;
}

}  // namespace

std::string peer_key(const DeviceId& id) { return "id:" + id.hex(); }
std::string hint_key(std::string_view sender_hint) { return "hint:" + std::string(sender_hint); }

TrustedAuthority::TrustedAuthority(ProtocolConfig cfg, const Clock& clock, crypto::RandomSource& rng)
    : TrustedAuthority(cfg, clock, rng, {crypto::SymKey::generate(rng)}) {}

TrustedAuthority::TrustedAuthority(ProtocolConfig cfg, const Clock& clock, crypto::RandomSource& rng,
                                   std::vector<crypto::SymKey> generations)
    : cfg_(cfg),
      clock_(clock),
      rng_(rng),
      generations_(std::move(generations)),
      blocks_(cfg.failure_threshold, cfg.block_duration_ms) {}

DeviceCredentials TrustedAuthority::register_device(const DeviceId& id) {
  std::lock_guard lock(mu_);
  if (registry_.contains(id)) throw RegistrationError("device already registered: " + id.display());
  const auto gen = static_cast<std::uint32_t>(generations_.size() - 1);
  const crypto::SymKey& k = generations_.back();
  crypto::Scalar r = crypto::random_scalar(rng_);
  crypto::Point q = crypto::detail::mul_base(r);
  while (by_point_.contains(q.compressed())) {
    r = crypto::random_scalar(rng_);
    q = crypto::detail::mul_base(r);
  }
  const crypto::Digest dp1 = compute_dp1(id, r, k);
  registry_.emplace(id, TADeviceRecord{id, dp1, q, gen});
  by_point_.emplace(q.compressed(), id);
  return DeviceCredentials{id, r, k, dp1, gen};
}

void TrustedAuthority::rotate_kdta() {
  std::lock_guard lock(mu_);
  generations_.push_back(crypto::SymKey::generate(rng_));
}

std::uint32_t TrustedAuthority::kdta_generation() const {
  std::lock_guard lock(mu_);
  return static_cast<std::uint32_t>(generations_.size() - 1);
}

crypto::SymKey TrustedAuthority::kdta(std::uint32_t generation) const {
  std::lock_guard lock(mu_);
  return generations_.at(generation);
}

std::size_t TrustedAuthority::registry_size() const {
  std::lock_guard lock(mu_);
  return registry_.size();
}

std::optional<TADeviceRecord> TrustedAuthority::lookup(const DeviceId& id) const {
  std::lock_guard lock(mu_);
  auto it = registry_.find(id);
  if (it == registry_.end()) return std::nullopt;
  return it->second;
}

std::optional<PublicDeviceInfo> TrustedAuthority::public_info_locked(const DeviceId& id) const {
  auto it = registry_.find(id);
  if (it == registry_.end()) return std::nullopt;
  return PublicDeviceInfo{id, it->second.q_d, device_inbox_topic(it->second.q_d)};
}

std::optional<PublicDeviceInfo> TrustedAuthority::public_info(const DeviceId& id) const {
  std::lock_guard lock(mu_);
  return public_info_locked(id);
}

std::vector<PublicDeviceInfo> TrustedAuthority::directory() const {
  std::lock_guard lock(mu_);
  std::vector<PublicDeviceInfo> out;
  for (const auto& [id, rec] : registry_) out.push_back({id, rec.q_d, device_inbox_topic(rec.q_d)});
  return out;
}

Failure TrustedAuthority::fail(const std::string& key, FailureReason reason, std::string detail) {
  blocks_.record_failure(key, clock_.now_ms());
  Failure f{reason, std::move(detail)};
  failures_.push_back(f);
  return f;
}

Failure TrustedAuthority::refuse_blocked(const std::string& key) {
  Failure f{FailureReason::kPeerBlocked, "sender blocked: " + key};
  failures_.push_back(f);
  return f;
}

Outcome<Outbound> TrustedAuthority::handle_msg1(const Msg1& m, const codec::CorrelationId& corr,
                                                const std::string& sender_hint) {
  std::lock_guard lock(mu_);
  const std::uint64_t now = clock_.now_ms();
  const std::string hkey = hint_key(sender_hint);
  if (blocks_.is_blocked(hkey, now)) return refuse_blocked(hkey);
  if (!is_fresh(m.t1, now, cfg_.freshness_window_ms)) {
    return fail(hkey, FailureReason::kStaleTimestamp, "Msg1 T1 outside freshness window");
  }
  const auto seen_key = std::make_pair(m.p_dx.hex(), m.t1);
  if (cfg_.replay_cache && seen_.contains(seen_key)) {
    return fail(hkey, FailureReason::kReplay, "Msg1 already seen");
  }

  // Newest generation first.
  std::optional<Bytes> plain;
  std::uint32_t gen = 0;
  for (std::size_t i = generations_.size(); i-- > 0 && !plain;) {
    try {
      plain = crypto::sym_decrypt(generations_[i], m.w);
      gen = static_cast<std::uint32_t>(i);
    } catch (const crypto::AuthenticationError&) {
    }
  }
  if (!plain) return fail(hkey, FailureReason::kAuthenticationFailed, "W does not decrypt");

  std::optional<DeviceId> id_x;
  std::optional<crypto::Scalar> r_x;
  try {
    const auto fields = codec::decode_fields(*plain);
    FieldReader r(fields);
    id_x = DeviceId::from_bytes(r.next(FieldType::kId));
    r_x = crypto::Scalar::from_bytes_checked(r.next(FieldType::kScalar));
    r.finish();
  } catch (const std::exception& e) {
    return fail(hkey, FailureReason::kMalformed, std::string("W plaintext malformed: ") + e.what());
  }

  const std::string key = peer_key(*id_x);
  if (blocks_.is_blocked(key, now)) return refuse_blocked(key);
  auto rec_x = registry_.find(*id_x);
  if (rec_x == registry_.end()) return fail(key, FailureReason::kUnknownPeer, "initiator not registered");
  if (rec_x->second.kdta_generation != gen) {
    return fail(key, FailureReason::kKeyGenerationMismatch, "W sealed under another K_dta generation");
  }

  const crypto::Digest dp1 = compute_dp1(*id_x, *r_x, generations_[gen]);
  if (!(dp1 == rec_x->second.dp1)) {
    return fail(key, FailureReason::kIdentityMismatch, "recomputed DP_1 differs from registry");
  }
  if (!(verifier_with(kTagPdx, dp1, pdx_fields(m.t1, m.z)) == m.p_dx)) {
    return fail(key, FailureReason::kVerifierMismatch, "P_dx does not verify");
  }

  const Bytes q_y = crypto::xor_mask(dp1, m.y);
  auto by_point = by_point_.find(to_compressed(q_y));
  if (by_point == by_point_.end()) return fail(key, FailureReason::kUnknownPeer, "responder key not registered");
  const TADeviceRecord& rec_y = registry_.at(by_point->second);
  if (rec_y.id == *id_x) return fail(key, FailureReason::kIdentityMismatch, "initiator targets itself");
  if (rec_y.kdta_generation != gen) {
    return fail(key, FailureReason::kKeyGenerationMismatch, "devices hold different K_dta generations");
  }

  Msg2 out;
  out.z = m.z;
  out.t2 = now;
  out.p_dy = verifier_with(kTagPdy, rec_y.dp1, pdy_fields(out.t2, out.z));

  blocks_.record_success(key);
  blocks_.record_success(hkey);
  pending_[corr] = TaPending{*id_x, dp1, rec_y.id, out.t2, now};
  if (cfg_.replay_cache) seen_[seen_key] = now;
  return Outbound{device_inbox_topic(rec_y.q_d), Envelope{MsgType::kMsg2, corr, inbox_, out.to_payload()}};
}

Outcome<std::vector<Outbound>> TrustedAuthority::handle_msg3(const Msg3& m, const codec::CorrelationId& corr,
                                                             const std::string& sender_hint) {
  std::lock_guard lock(mu_);
  const std::uint64_t now = clock_.now_ms();
  const std::string hkey = hint_key(sender_hint);
  if (blocks_.is_blocked(hkey, now)) return refuse_blocked(hkey);

  auto it = pending_.find(corr);
  if (it != pending_.end() && now - it->second.created_at > cfg_.pending_ttl_ms()) {
    pending_.erase(it);
    it = pending_.end();
  }
  if (it == pending_.end()) return fail(hkey, FailureReason::kMissingSession, "no pending session");
  const TaPending p = it->second;

  const std::string key = peer_key(p.id_y);
  if (blocks_.is_blocked(key, now)) return refuse_blocked(key);
  if (!is_fresh(m.t3, now, cfg_.freshness_window_ms)) {
    return fail(key, FailureReason::kStaleTimestamp, "Msg3 T3 outside freshness window");
  }
  const TADeviceRecord& rec_y = registry_.at(p.id_y);
  if (!(verifier_with(kTagPdta, rec_y.dp1, pdta_fields(p.id_x, p.id_y, m.t3, m.z_y)) == m.p_dta)) {
    return fail(key, FailureReason::kVerifierMismatch, "P_dTA does not verify");
  }

  Bytes suffix(16);
  rng_.fill(suffix);
  Msg4 out;
  out.z_y = m.z_y;
  out.t4 = now;
  out.topic = std::string(kSessionTopicPrefix) + to_hex(suffix);
  out.p_dxx = verifier_with(kTagPdxx, p.dp1_x, pdxx_fields(out.z_y, out.t4, out.topic));

  pending_.erase(corr);
  blocks_.record_success(key);
  const TADeviceRecord& rec_x = registry_.at(p.id_x);
  std::vector<Outbound> outs;
  outs.push_back({device_inbox_topic(rec_x.q_d), Envelope{MsgType::kMsg4, corr, inbox_, out.to_payload()}});
  outs.push_back({device_inbox_topic(rec_y.q_d),
                  Envelope{MsgType::kTopicNotice, corr, inbox_, TopicNotice{out.topic}.to_payload()}});
  return outs;
}

HandleResult TrustedAuthority::handle(ByteView raw) {
  HandleResult result;
  Envelope env;
  try {
    env = codec::decode_envelope(raw);
  } catch (const codec::ParseError& e) {
    std::lock_guard lock(mu_);
    result.failure = fail(hint_key("?"), FailureReason::kMalformed, e.what());
    return result;
  }
  try {
    switch (env.type) {
      case MsgType::kMsg1: {
        auto r = handle_msg1(Msg1::from_payload(env.payload), env.correlation, env.sender_hint);
        if (r) result.outbound.push_back(std::move(r.value()));
        else result.failure = r.failure();
        return result;
      }
      case MsgType::kMsg3: {
        auto r = handle_msg3(Msg3::from_payload(env.payload), env.correlation, env.sender_hint);
        if (r) result.outbound = std::move(r.value());
        else result.failure = r.failure();
        return result;
      }
      default:
        break;
    }
  } catch (const codec::ParseError& e) {
    std::lock_guard lock(mu_);
    result.failure = fail(hint_key(env.sender_hint), FailureReason::kMalformed, e.what());
    return result;
  }
  std::lock_guard lock(mu_);
  result.failure = fail(hint_key(env.sender_hint), FailureReason::kMalformed,
                        "unexpected message type " + std::string(codec::msg_type_name(env.type)));
  return result;
}

bool TrustedAuthority::is_blocked(const std::string& peer) const {
  std::lock_guard lock(mu_);
  return blocks_.state(peer).blocked_at(clock_.now_ms());
}

BlockState TrustedAuthority::block_state(const std::string& peer) const {
  std::lock_guard lock(mu_);
  return blocks_.state(peer);
}

std::size_t TrustedAuthority::pending_count() const {
  std::lock_guard lock(mu_);
  return pending_.size();
}

std::optional<TaPending> TrustedAuthority::pending(const codec::CorrelationId& corr) const {
  std::lock_guard lock(mu_);
  auto it = pending_.find(corr);
  if (it == pending_.end()) return std::nullopt;
  return it->second;
}

void TrustedAuthority::expire_pending() {
  std::lock_guard lock(mu_);
  const std::uint64_t now = clock_.now_ms();
  std::erase_if(pending_, [&](const auto& kv) { return now - kv.second.created_at > cfg_.pending_ttl_ms(); });
  std::erase_if(seen_, [&](const auto& kv) { return now - kv.second > 2 * cfg_.freshness_window_ms; });
}

std::vector<Failure> TrustedAuthority::failure_log() const {
  std::lock_guard lock(mu_);
  return failures_;
}

std::string TrustedAuthority::to_json() const {
  std::lock_guard lock(mu_);
  json j;
  j["schema_version"] = kSchemaVersion;
  j["kdta_generations"] = json::array();
  for (const auto& k : generations_) j["kdta_generations"].push_back(to_hex(k.raw()));
  j["devices"] = json::array();
  for (const auto& [id, rec] : registry_) {
    j["devices"].push_back({{"id", id.hex()},
                            {"dp1", rec.dp1.hex()},
                            {"q_d", to_hex(rec.q_d.compressed())},
                            {"kdta_generation", rec.kdta_generation}});
  }
  j["block_list"] = json::array();
  for (const auto& [peer, st] : blocks_.entries()) {
    json e{{"peer", peer}, {"failures", st.failures}, {"blocked_until", nullptr}};
    if (st.blocked_until) e["blocked_until"] = *st.blocked_until;
    j["block_list"].push_back(e);
  }
  return j.dump(2);
}

std::unique_ptr<TrustedAuthority> TrustedAuthority::from_json(std::string_view text, ProtocolConfig cfg,
                                                              const Clock& clock, crypto::RandomSource& rng) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw codec::ParseError(std::string("registry is not valid JSON: ") + e.what());
  }
  try {
    if (j.at("schema_version").get<int>() != kSchemaVersion) {
      throw codec::ParseError("unsupported registry schema version");
    }
    std::vector<crypto::SymKey> gens;
    for (const auto& k : j.at("kdta_generations")) gens.push_back(crypto::SymKey::from_bytes(from_hex(k.get<std::string>())));
    if (gens.empty()) throw codec::ParseError("registry holds no K_dta");
    std::unique_ptr<TrustedAuthority> ta(new TrustedAuthority(cfg, clock, rng, std::move(gens)));
    for (const auto& d : j.at("devices")) {
      const DeviceId id = DeviceId::from_bytes(from_hex(d.at("id").get<std::string>()));
      const auto q = crypto::Point::decompress(from_hex(d.at("q_d").get<std::string>()));
      const auto gen = d.at("kdta_generation").get<std::uint32_t>();
      if (gen >= ta->generations_.size()) throw codec::ParseError("device references unknown K_dta generation");
      if (ta->registry_.contains(id)) throw codec::ParseError("duplicate device in registry");
      ta->registry_.emplace(id, TADeviceRecord{id, crypto::Digest::from_bytes(from_hex(d.at("dp1").get<std::string>())), q, gen});
      ta->by_point_.emplace(q.compressed(), id);
    }
    if (j.contains("block_list")) {
      for (const auto& e : j.at("block_list")) {
        BlockState st;
        st.failures = e.at("failures").get<std::uint32_t>();
        if (!e.at("blocked_until").is_null()) st.blocked_until = e.at("blocked_until").get<std::uint64_t>();
        ta->blocks_.restore(e.at("peer").get<std::string>(), st);
      }
    }
    return ta;
  } catch (const json::exception& e) {
    throw codec::ParseError(std::string("registry schema error: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw codec::ParseError(std::string("registry value error: ") + e.what());
  }
}

void TrustedAuthority::save(const std::filesystem::path& path) const { write_file_atomic(path, to_json(), 0600); }

std::unique_ptr<TrustedAuthority> TrustedAuthority::load(const std::filesystem::path& path, ProtocolConfig cfg,
                                                         const Clock& clock, crypto::RandomSource& rng) {
  return from_json(read_file(path), cfg, clock, rng);
}

}  // namespace ebake::protocol
