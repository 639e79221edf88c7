// Copyright 2026 The EBAKE Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "ebake/protocol/handshake.hpp"

#include <algorithm>
#include <cctype>

#include "ebake/core/clock.hpp"

namespace ebake::protocol {

using codec::Field;
using codec::FieldReader;
using codec::FieldType;

Bytes encode_initiator_secret(const InitiatorSecret& s) {
  const Field f[] = {crypto::to_field(s.q_dx), Field::id(s.id_x.bytes), Field::bytes(s.n_x),
                     Field::timestamp(s.t1)};
  return codec::encode_fields(f);
}

InitiatorSecret decode_initiator_secret(ByteView raw) {
  const auto fields = codec::decode_fields(raw);
  FieldReader r(fields);
  InitiatorSecret s{crypto::Point::decompress(r.next(FieldType::kPoint)),
                    DeviceId::from_bytes(r.next(FieldType::kId)), r.next(FieldType::kBytes), 0};
  s.t1 = r.next_timestamp();
  r.finish();
  return s;
}

Bytes encode_responder_secret(const ResponderSecret& s) {
  const Field f[] = {Field::id(s.id_y.bytes), Field::bytes(s.n_y), Field::timestamp(s.t2)};
  return codec::encode_fields(f);
}

ResponderSecret decode_responder_secret(ByteView raw) {
  const auto fields = codec::decode_fields(raw);
  FieldReader r(fields);
  ResponderSecret s{DeviceId::from_bytes(r.next(FieldType::kId)), r.next(FieldType::kBytes), 0};
  s.t2 = r.next_timestamp();
  r.finish();
  return s;
}

std::vector<Field> pdx_fields(std::uint64_t t1, ByteView z) {
  return {Field::timestamp(t1), Field::bytes(z)};
}

std::vector<Field> pdy_fields(std::uint64_t t2, ByteView z) {
  return {Field::timestamp(t2), Field::bytes(z)};
}

std::vector<Field> pdta_fields(const DeviceId& id_x, const DeviceId& id_y, std::uint64_t t3, ByteView z_y) {
  return {Field::id(id_x.bytes), Field::id(id_y.bytes), Field::timestamp(t3), Field::bytes(z_y)};
}

std::vector<Field> pdxx_fields(ByteView z_y, std::uint64_t t4, std::string_view topic) {
  return {Field::bytes(z_y), Field::timestamp(t4), Field::string(topic)};
}

crypto::Digest verifier_with(std::string_view tag, const crypto::Digest& dp1, std::span<const Field> extra) {
  std::vector<Field> fields;
  fields.reserve(extra.size() + 1);
  fields.push_back(crypto::to_field(dp1));
  fields.insert(fields.end(), extra.begin(), extra.end());
  return crypto::hash(tag, fields);
}

bool is_session_topic(std::string_view topic) {
  if (!topic.starts_with(kSessionTopicPrefix)) return false;
  const auto suffix = topic.substr(kSessionTopicPrefix.size());
  return suffix.size() == 32 && std::all_of(suffix.begin(), suffix.end(), [](unsigned char c) {
           return std::isdigit(c) || (c >= 'a' && c <= 'f');
         });
}

InitiatorStart initiator_start(const SecureElement& se, const crypto::Point& q_dy, const DeviceId& target,
                               std::uint64_t now, crypto::RandomSource& rng) {
  if (q_dy.is_identity()) throw crypto::InvalidPoint("responder key is the identity");
  InitiatorStart out;
  InitiatorPending& p = out.pending;
  rng.fill(p.correlation);
  p.nonce = crypto::random_nonce(rng);
  p.t1 = now;
  p.target = target;
  p.started_at = now;

  Msg1& m = out.msg;
  m.t1 = now;
  m.w = se.seal_identity(rng);
  const auto q = q_dy.compressed();
  m.y = se.mask(q);
  const Bytes secret = encode_initiator_secret({se.public_key(), se.id(), p.nonce, p.t1});
  m.z = crypto::asym_encrypt(q_dy, secret, rng).serialize();
  m.p_dx = se.verifier(kTagPdx, pdx_fields(m.t1, m.z));
  return out;
}

Outcome<ResponderReply> responder_handle_msg2(const SecureElement& se, const Msg2& m, std::uint64_t now,
                                              const ProtocolConfig& cfg, crypto::RandomSource& rng) {
  if (!is_fresh(m.t2, now, cfg.freshness_window_ms)) {
    return Failure{FailureReason::kStaleTimestamp, "Msg2 T2 outside freshness window"};
  }
  if (!(se.verifier(kTagPdy, pdy_fields(m.t2, m.z)) == m.p_dy)) {
    return Failure{FailureReason::kVerifierMismatch, "P_dy does not verify"};
  }
  InitiatorSecret ini;
  try {
    ini = decode_initiator_secret(se.open(m.z));
  } catch (const crypto::AuthenticationError&) {
    return Failure{FailureReason::kAuthenticationFailed, "Z does not decrypt"};
  } catch (const std::exception& e) {
    return Failure{FailureReason::kMalformed, std::string("Z plaintext malformed: ") + e.what()};
  }

  const Bytes n_y = crypto::random_nonce(rng);
  const Bytes secret = encode_responder_secret({se.id(), n_y, m.t2});
  ResponderReply reply{Msg3{}, crypto::Digest{}, ini.id_x};
  reply.msg.z_y = crypto::asym_encrypt(ini.q_dx, secret, rng).serialize();
  reply.msg.t3 = now;
  reply.msg.p_dta = se.verifier(kTagPdta, pdta_fields(ini.id_x, se.id(), reply.msg.t3, reply.msg.z_y));
  reply.sk = se.session_key({ini.id_x, ini.n_x, ini.t1, se.id(), n_y, m.t2});
  return reply;
}

Outcome<SessionKey> initiator_finish(const InitiatorPending& pending, const Msg4& m, const SecureElement& se,
                                     std::uint64_t now, const ProtocolConfig& cfg) {
  if (!is_fresh(m.t4, now, cfg.freshness_window_ms)) {
    return Failure{FailureReason::kStaleTimestamp, "Msg4 T4 outside freshness window"};
  }
  if (!is_session_topic(m.topic)) return Failure{FailureReason::kMalformed, "Msg4 topic malformed"};
  if (!(se.verifier(kTagPdxx, pdxx_fields(m.z_y, m.t4, m.topic)) == m.p_dxx)) {
    return Failure{FailureReason::kVerifierMismatch, "P_dxx does not verify"};
  }
  ResponderSecret resp;
  try {
    resp = decode_responder_secret(se.open(m.z_y));
  } catch (const crypto::AuthenticationError&) {
    return Failure{FailureReason::kAuthenticationFailed, "Z_y does not decrypt"};
  } catch (const std::exception& e) {
    return Failure{FailureReason::kMalformed, std::string("Z_y plaintext malformed: ") + e.what()};
  }
  if (resp.id_y != pending.target) {
    return Failure{FailureReason::kIdentityMismatch, "responder identity differs from target"};
  }
  SessionKey sk;
  sk.key = se.session_key({se.id(), pending.nonce, pending.t1, resp.id_y, resp.n_y, resp.t2});
  sk.topic = m.topic;
  sk.peer = resp.id_y;
  sk.established_at = now;
  sk.role = Role::kInitiator;
  return sk;
}

}  // namespace ebake::protocol
