// Copyright 2026 The EBAKE Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <optional>
#include <vector>

#include "ebake/codec/envelope.hpp"
#include "ebake/core/clock.hpp"
#include "ebake/core/outcome.hpp"
#include "ebake/crypto/random.hpp"
#include "ebake/protocol/authority.hpp"
#include "ebake/protocol/blocklist.hpp"
#include "ebake/protocol/handshake.hpp"

namespace ebake::protocol {

struct ResponderPending {
  codec::CorrelationId correlation{};
  crypto::Digest sk;
  DeviceId peer;
  std::uint64_t created_at = 0;
};

/// Device state machine. Not thread-safe; one owner drives it.
class Device {
 public:
  Device(SecureElement se, ProtocolConfig cfg, const Clock& clock, crypto::RandomSource& rng);

  const SecureElement& secure_element() const { return se_; }
  const DeviceId& id() const { return se_.id(); }
  std::string inbox_topic() const { return se_.inbox_topic(); }

  /// Builds Msg1 for `target`. Refused without sending if the TA is blocked.
  Outcome<Outbound> initiate(const DeviceId& target, const crypto::Point& q_target);

  HandleResult handle(ByteView raw);
  Outcome<Outbound> handle_msg2(const Msg2& m, const codec::CorrelationId& corr);
  Outcome<SessionKey> handle_msg4(const Msg4& m, const codec::CorrelationId& corr);
  Outcome<SessionKey> handle_topic_notice(const TopicNotice& m, const codec::CorrelationId& corr);

  /// Drops pending sessions past their deadline; each initiator timeout is
  /// returned as a kTimeout failure.
  std::vector<Failure> expire();

  bool ta_blocked() const;
  BlockState ta_block_state() const { return blocks_.state(kTaPeer); }
  const std::vector<SessionKey>& sessions() const { return sessions_; }
  std::optional<SessionKey> session(const codec::CorrelationId& corr) const;
  const std::vector<Failure>& failures() const { return failures_; }
  const std::map<codec::CorrelationId, InitiatorPending>& initiator_pending() const {
    return initiating_;
  }
  std::size_t responder_pending_count() const { return responding_.size(); }
  /// Key derived for `corr` as responder, whether or not the topic notice
  /// has arrived yet.
  std::optional<crypto::Digest> responder_key(const codec::CorrelationId& corr) const;

 private:
  Failure fail_ta(FailureReason reason, std::string detail);

  SecureElement se_;
  ProtocolConfig cfg_;
  const Clock& clock_;
  crypto::RandomSource& rng_;
  mutable BlockList blocks_;
  std::map<codec::CorrelationId, InitiatorPending> initiating_;
  std::map<codec::CorrelationId, ResponderPending> responding_;
  std::map<codec::CorrelationId, SessionKey> by_correlation_;
  std::vector<SessionKey> sessions_;
  std::vector<Failure> failures_;
};

}  // namespace ebake::protocol
