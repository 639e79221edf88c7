// Copyright 2026 The EBAKE Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "ebake/codec/envelope.hpp"

#include <algorithm>

namespace ebake::codec {

namespace {

using FT = FieldType;

constexpr FT kMsg1Schema[] = {FT::kBytes, FT::kBytes, FT::kBytes, FT::kDigest, FT::kTimestamp};
constexpr FT kMsg2Schema[] = {FT::kBytes, FT::kDigest, FT::kTimestamp};
constexpr FT kMsg3Schema[] = {FT::kBytes, FT::kDigest, FT::kTimestamp};
constexpr FT kMsg4Schema[] = {FT::kBytes, FT::kDigest, FT::kTimestamp, FT::kString};
constexpr FT kTopicSchema[] = {FT::kString};
constexpr FT kDasMsg1Schema[] = {FT::kTimestamp, FT::kId,    FT::kScalar, FT::kScalar,
                                 FT::kPoint,     FT::kPoint, FT::kPoint};
constexpr FT kDasMsg2Schema[] = {FT::kId,     FT::kTimestamp, FT::kPoint, FT::kScalar,
                                 FT::kScalar, FT::kDigest,    FT::kPoint, FT::kPoint};
constexpr FT kDasMsg3Schema[] = {FT::kDigest, FT::kTimestamp};

}  // namespace

std::string_view msg_type_name(MsgType t) {
  switch (t) {
    case MsgType::kMsg1: return "M1";
    case MsgType::kMsg2: return "M2";
    case MsgType::kMsg3: return "M3";
    case MsgType::kMsg4: return "M4";
    case MsgType::kTopicNotice: return "TOPIC";
    case MsgType::kDasMsg1: return "DAS-M1";
    case MsgType::kDasMsg2: return "DAS-M2";
    case MsgType::kDasMsg3: return "DAS-M3";
  }
  return "unknown";
}

bool is_known_msg_type(std::uint8_t raw) {
  return (raw >= 1 && raw <= 5) || (raw >= 10 && raw <= 12);
}

std::span<const FieldType> payload_schema(MsgType t) {
  switch (t) {
    case MsgType::kMsg1: return kMsg1Schema;
    case MsgType::kMsg2: return kMsg2Schema;
    case MsgType::kMsg3: return kMsg3Schema;
    case MsgType::kMsg4: return kMsg4Schema;
    case MsgType::kTopicNotice: return kTopicSchema;
    case MsgType::kDasMsg1: return kDasMsg1Schema;
    case MsgType::kDasMsg2: return kDasMsg2Schema;
    case MsgType::kDasMsg3: return kDasMsg3Schema;
  }
  return {};
}

Bytes encode_envelope(const Envelope& env) {
  const std::uint8_t type = static_cast<std::uint8_t>(env.type);
  const Field fields[] = {
      Field::bytes(ByteView(&type, 1)),
      Field::id(env.correlation),
      Field::string(env.sender_hint),
      Field::bytes(env.payload),
  };
  return encode_fields(fields);
}

std::vector<Field> decode_payload(MsgType type, ByteView payload) {
  auto fields = decode_fields(payload);
  const auto schema = payload_schema(type);
  if (fields.size() != schema.size()) throw ParseError("payload field count does not match schema");
  for (std::size_t i = 0; i < schema.size(); ++i) {
    if (fields[i].type != schema[i]) throw ParseError("payload field type does not match schema");
  }
  return fields;
}

Envelope decode_envelope(ByteView raw) {
  const auto fields = decode_fields(raw);
  FieldReader r(fields);
  const Bytes& type = r.next(FieldType::kBytes);
  if (type.size() != 1 || !is_known_msg_type(type[0])) throw ParseError("unknown message type");
  Envelope env;
  env.type = static_cast<MsgType>(type[0]);
  const Bytes& corr = r.next(FieldType::kId);
  std::copy(corr.begin(), corr.end(), env.correlation.begin());
  env.sender_hint = r.next_string();
  env.payload = r.next(FieldType::kBytes);
  r.finish();
  decode_payload(env.type, env.payload);
  return env;
}

}  // namespace ebake::codec
