// Copyright 2026 The EBAKE Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "ebake/protocol/messages.hpp"

#include <vector>

namespace ebake::protocol {

using codec::Field;
using codec::FieldReader;
using codec::FieldType;
using codec::MsgType;

namespace {

crypto::Digest read_digest(FieldReader& r) { return crypto::Digest::from_bytes(r.next(FieldType::kDigest)); }

}  // namespace

Bytes Msg1::to_payload() const {
  const Field f[] = {Field::bytes(w), Field::bytes(y), Field::bytes(z), crypto::to_field(p_dx),
                     Field::timestamp(t1)};
  return codec::encode_fields(f);
}

Msg1 Msg1::from_payload(ByteView payload) {
  const auto fields = codec::decode_payload(MsgType::kMsg1, payload);
  FieldReader r(fields);
  Msg1 m;
  m.w = r.next(FieldType::kBytes);
  m.y = r.next(FieldType::kBytes);
  if (m.y.size() != kMaskedPointSize) throw codec::ParseError("Msg1 Y must be 33 bytes");
  m.z = r.next(FieldType::kBytes);
  m.p_dx = read_digest(r);
  m.t1 = r.next_timestamp();
  r.finish();
  return m;
}

Bytes Msg2::to_payload() const {
  const Field f[] = {Field::bytes(z), crypto::to_field(p_dy), Field::timestamp(t2)};
  return codec::encode_fields(f);
}

Msg2 Msg2::from_payload(ByteView payload) {
  const auto fields = codec::decode_payload(MsgType::kMsg2, payload);
  FieldReader r(fields);
  Msg2 m;
  m.z = r.next(FieldType::kBytes);
  m.p_dy = read_digest(r);
  m.t2 = r.next_timestamp();
  r.finish();
  return m;
}

Bytes Msg3::to_payload() const {
  const Field f[] = {Field::bytes(z_y), crypto::to_field(p_dta), Field::timestamp(t3)};
  return codec::encode_fields(f);
}

Msg3 Msg3::from_payload(ByteView payload) {
  const auto fields = codec::decode_payload(MsgType::kMsg3, payload);
  FieldReader r(fields);
  Msg3 m;
  m.z_y = r.next(FieldType::kBytes);
  m.p_dta = read_digest(r);
  m.t3 = r.next_timestamp();
  r.finish();
  return m;
}

Bytes Msg4::to_payload() const {
  const Field f[] = {Field::bytes(z_y), crypto::to_field(p_dxx), Field::timestamp(t4), Field::string(topic)};
  return codec::encode_fields(f);
}

Msg4 Msg4::from_payload(ByteView payload) {
  const auto fields = codec::decode_payload(MsgType::kMsg4, payload);
  FieldReader r(fields);
  Msg4 m;
  m.z_y = r.next(FieldType::kBytes);
  m.p_dxx = read_digest(r);
  m.t4 = r.next_timestamp();
  m.topic = r.next_string();
  r.finish();
  return m;
}

Bytes TopicNotice::to_payload() const {
  const Field f[] = {Field::string(topic)};
  return codec::encode_fields(f);
}

TopicNotice TopicNotice::from_payload(ByteView payload) {
  const auto fields = codec::decode_payload(MsgType::kTopicNotice, payload);
  FieldReader r(fields);
  TopicNotice m{r.next_string()};
  r.finish();
  return m;
}

}  // namespace ebake::protocol
