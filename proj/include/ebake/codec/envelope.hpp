// Copyright 2026 The EBAKE Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>

#include "ebake/codec/fields.hpp"

namespace ebake::codec {

enum class MsgType : std::uint8_t {
  kMsg1 = 1,
  kMsg2 = 2,
  kMsg3 = 3,
  kMsg4 = 4,
  kTopicNotice = 5,
  kDasMsg1 = 10,
  kDasMsg2 = 11,
  kDasMsg3 = 12,
};

std::string_view msg_type_name(MsgType t);
bool is_known_msg_type(std::uint8_t raw);

/// Field types a payload of the given message type must carry, in order.
std::span<const FieldType> payload_schema(MsgType t);

using CorrelationId = std::array<std::uint8_t, 16>;

/// Transport unit. MQTT carries no sender identity, so the envelope holds a
/// correlation id linking the messages of one handshake and an optional
/// reply hint topic.
struct Envelope {
  MsgType type = MsgType::kMsg1;
  CorrelationId correlation{};
  std::string sender_hint;
  Bytes payload;  // canonical encoding matching payload_schema(type)

  bool operator==(const Envelope&) const = default;
};

/// Encoded as canonical fields [bytes(type), id(correlation),
/// string(sender_hint), bytes(payload)].
Bytes encode_envelope(const Envelope& env);

/// Rejects unknown message types, trailing bytes and payloads whose field
/// types do not match the schema of `type`.
Envelope decode_envelope(ByteView raw);

/// Decodes and schema-checks a payload, returning its fields.
std::vector<Field> decode_payload(MsgType type, ByteView payload);

}  // namespace ebake::codec
