// Copyright 2026 The EBAKE Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

// Device-side handshake steps as pure functions over a secure element and a
// timestamp. The Device class wraps them with blocking and pending state.

#pragma once

#include <cstdint>

#include "ebake/codec/envelope.hpp"
#include "ebake/core/outcome.hpp"
#include "ebake/crypto/random.hpp"
#include "ebake/protocol/config.hpp"
#include "ebake/protocol/credentials.hpp"
#include "ebake/protocol/messages.hpp"
#include "ebake/protocol/session.hpp"

namespace ebake::protocol {

struct InitiatorPending {
  codec::CorrelationId correlation{};
  Bytes nonce;
  std::uint64_t t1 = 0;
  DeviceId target;
  std::uint64_t started_at = 0;
};

struct InitiatorStart {
  Msg1 msg;
  InitiatorPending pending;
};

/// Step 1. Counters: 1 sym, 1 asym, 1 hash, 1 xor.
InitiatorStart initiator_start(const SecureElement& se, const crypto::Point& q_dy,
                               const DeviceId& target, std::uint64_t now, crypto::RandomSource& rng);

/// Step 5. Counters: 1 asym, 2 hash.
Outcome<SessionKey> initiator_finish(const InitiatorPending& pending, const Msg4& m,
                                     const SecureElement& se, std::uint64_t now,
                                     const ProtocolConfig& cfg);

struct ResponderReply {
  Msg3 msg;
  crypto::Digest sk;
  DeviceId peer;
};

/// Step 3. Counters: 1 asym decrypt, 1 asym encrypt, 3 hash.
Outcome<ResponderReply> responder_handle_msg2(const SecureElement& se, const Msg2& m,
                                              std::uint64_t now, const ProtocolConfig& cfg,
                                              crypto::RandomSource& rng);

/// Plaintexts carried inside the hybrid ciphertexts.
struct InitiatorSecret {
  crypto::Point q_dx;
  DeviceId id_x;
  Bytes n_x;
  std::uint64_t t1 = 0;
};
struct ResponderSecret {
  DeviceId id_y;
  Bytes n_y;
  std::uint64_t t2 = 0;
};
Bytes encode_initiator_secret(const InitiatorSecret& s);
InitiatorSecret decode_initiator_secret(ByteView raw);
Bytes encode_responder_secret(const ResponderSecret& s);
ResponderSecret decode_responder_secret(ByteView raw);

/// Extra verifier fields (after DP_1) for each tag.
std::vector<codec::Field> pdx_fields(std::uint64_t t1, ByteView z);
std::vector<codec::Field> pdy_fields(std::uint64_t t2, ByteView z);
std::vector<codec::Field> pdta_fields(const DeviceId& id_x, const DeviceId& id_y, std::uint64_t t3,
                                      ByteView z_y);
std::vector<codec::Field> pdxx_fields(ByteView z_y, std::uint64_t t4, std::string_view topic);

/// hash(tag, [dp1, extra...]) for the TA side, which holds DP_1 directly.
crypto::Digest verifier_with(std::string_view tag, const crypto::Digest& dp1,
                             std::span<const codec::Field> extra);

bool is_session_topic(std::string_view topic);

}  // namespace ebake::protocol
