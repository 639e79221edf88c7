// Copyright 2026 The EBAKE Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "ebake/protocol/device.hpp"

namespace ebake::protocol {

using codec::Envelope;
using codec::MsgType;

Device::Device(SecureElement se, ProtocolConfig cfg, const Clock& clock, crypto::RandomSource& rng)
    : se_(std::move(se)),
      cfg_(cfg),
      clock_(clock),
      rng_(rng),
      blocks_(cfg.failure_threshold, cfg.block_duration_ms) {}

bool Device::ta_blocked() const { return blocks_.is_blocked(kTaPeer, clock_.now_ms()); }

Failure Device::fail_ta(FailureReason reason, std::string detail) {
  blocks_.record_failure(kTaPeer, clock_.now_ms());
  Failure f{reason, std::move(detail)};
  failures_.push_back(f);
  return f;
}

namespace {

Failure ta_refused() { return Failure{FailureReason::kPeerBlocked, "TA is blocked by this device"}; }

}  // namespace

Outcome<Outbound> Device::initiate(const DeviceId& target, const crypto::Point& q_target) {
  const std::uint64_t now = clock_.now_ms();
  if (ta_blocked()) {
    failures_.push_back(ta_refused());
    return ta_refused();
  }
  InitiatorStart start = initiator_start(se_, q_target, target, now, rng_);
  const auto corr = start.pending.correlation;
  initiating_[corr] = std::move(start.pending);
  return Outbound{std::string(kTaInboxTopic), Envelope{MsgType::kMsg1, corr, inbox_topic(), start.msg.to_payload()}};
}

Outcome<Outbound> Device::handle_msg2(const Msg2& m, const codec::CorrelationId& corr) {
  if (ta_blocked()) {
    failures_.push_back(ta_refused());
    return ta_refused();
  }
  // A second Msg2 for a live correlation (a replayed Msg1 makes the TA emit
  // one) must not replace the key already committed to in Msg3.
  if (responding_.contains(corr) || by_correlation_.contains(corr)) {
    Failure f{FailureReason::kReplay, "duplicate Msg2 for correlation"};
    failures_.push_back(f);
    return f;
  }
  const std::uint64_t now = clock_.now_ms();
  auto reply = responder_handle_msg2(se_, m, now, cfg_, rng_);
  if (!reply) return fail_ta(reply.reason(), reply.failure().detail);
  blocks_.record_success(kTaPeer);
  responding_[corr] = ResponderPending{corr, reply.value().sk, reply.value().peer, now};
  return Outbound{std::string(kTaInboxTopic),
                  Envelope{MsgType::kMsg3, corr, inbox_topic(), reply.value().msg.to_payload()}};
}

Outcome<SessionKey> Device::handle_msg4(const Msg4& m, const codec::CorrelationId& corr) {
  if (ta_blocked()) {
    failures_.push_back(ta_refused());
    return ta_refused();
  }
  auto it = initiating_.find(corr);
  if (it == initiating_.end()) return fail_ta(FailureReason::kMissingSession, "no pending initiator session");
  auto sk = initiator_finish(it->second, m, se_, clock_.now_ms(), cfg_);
  if (!sk) return fail_ta(sk.reason(), sk.failure().detail);
  initiating_.erase(it);
  blocks_.record_success(kTaPeer);
  by_correlation_[corr] = sk.value();
  sessions_.push_back(sk.value());
  return sk;
}

Outcome<SessionKey> Device::handle_topic_notice(const TopicNotice& m, const codec::CorrelationId& corr) {
  if (ta_blocked()) {
    failures_.push_back(ta_refused());
    return ta_refused();
  }
  const std::uint64_t now = clock_.now_ms();
  auto it = responding_.find(corr);
  if (it != responding_.end() && now - it->second.created_at > cfg_.handshake_timeout_ms()) {
    responding_.erase(it);
    it = responding_.end();
  }
  if (it == responding_.end()) return fail_ta(FailureReason::kMissingSession, "no pending responder session");
  if (!is_session_topic(m.topic)) return fail_ta(FailureReason::kMalformed, "topic notice malformed");
  SessionKey sk{it->second.sk, m.topic, it->second.peer, now, Role::kResponder};
  responding_.erase(it);
  blocks_.record_success(kTaPeer);
  by_correlation_[corr] = sk;
  sessions_.push_back(sk);
  return sk;
}

HandleResult Device::handle(ByteView raw) {
  HandleResult result;
  try {
    const Envelope env = codec::decode_envelope(raw);
    switch (env.type) {
      case MsgType::kMsg2: {
        auto r = handle_msg2(Msg2::from_payload(env.payload), env.correlation);
        if (r) result.outbound.push_back(std::move(r.value()));
        else result.failure = r.failure();
        return result;
      }
      case MsgType::kMsg4: {
        auto r = handle_msg4(Msg4::from_payload(env.payload), env.correlation);
        if (r) result.established = r.value();
        else result.failure = r.failure();
        return result;
      }
      case MsgType::kTopicNotice: {
        auto r = handle_topic_notice(TopicNotice::from_payload(env.payload), env.correlation);
        if (r) result.established = r.value();
        else result.failure = r.failure();
        return result;
      }
      default:
        result.failure = fail_ta(FailureReason::kMalformed,
                                 "unexpected message type " + std::string(codec::msg_type_name(env.type)));
        return result;
    }
  } catch (const codec::ParseError& e) {
    result.failure = fail_ta(FailureReason::kMalformed, e.what());
  }
  return result;
}

std::vector<Failure> Device::expire() {
  const std::uint64_t now = clock_.now_ms();
  std::vector<Failure> out;
  for (auto it = initiating_.begin(); it != initiating_.end();) {
    if (now - it->second.started_at > cfg_.handshake_timeout_ms()) {
      out.push_back({FailureReason::kTimeout, "handshake with " + it->second.target.display() + " timed out"});
      it = initiating_.erase(it);
    } else {
      ++it;
    }
  }
  std::erase_if(responding_, [&](const auto& kv) { return now - kv.second.created_at > cfg_.handshake_timeout_ms(); });
  failures_.insert(failures_.end(), out.begin(), out.end());
  return out;
}

std::optional<SessionKey> Device::session(const codec::CorrelationId& corr) const {
  auto it = by_correlation_.find(corr);
  if (it == by_correlation_.end()) return std::nullopt;
  return it->second;
}

std::optional<crypto::Digest> Device::responder_key(const codec::CorrelationId& corr) const {
  if (auto it = responding_.find(corr); it != responding_.end()) return it->second.sk;
  if (auto it = by_correlation_.find(corr); it != by_correlation_.end() && it->second.role == Role::kResponder) {
    return it->second.key;
  }
  return std::nullopt;
}

}  // namespace ebake::protocol
