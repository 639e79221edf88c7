// Copyright 2026 The EBAKE Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <map>

#include "ebake/codec/envelope.hpp"
#include "ebake/codec/fields.hpp"
#include "ebake/crypto/random.hpp"
#include "oracle/canonical_oracle.hpp"

namespace {

using namespace ebake;
using namespace ebake::codec;

Field random_field(crypto::RandomSource& rng) {
  const auto tag = static_cast<FieldType>(rng.uniform(1, 7));
  std::size_t len = fixed_width(tag).value_or(rng.uniform(0, 64));
  Bytes v = rng.bytes(len);
  return Field{tag, v};
}

std::vector<Field> random_fields(crypto::RandomSource& rng) {
  std::vector<Field> out(rng.uniform(0, 8));
  for (auto& f : out) f = random_field(rng);
  return out;
}

TEST(EncodeFields, EmptyIsVersionByteOnly) { EXPECT_EQ(encode_fields({}), Bytes{0x01}); }

TEST(EncodeFields, IdFraming) {
  Bytes id(16);
  for (int i = 0; i < 16; ++i) id[i] = static_cast<std::uint8_t>(0xa0 + i);
  const Field f[] = {Field::id(id)};
  Bytes expected = from_hex("010600000010");
  expected.insert(expected.end(), id.begin(), id.end());
  EXPECT_EQ(encode_fields(f), expected);
}

TEST(EncodeFields, TimestampIsBigEndianMillis) {
  const Field f[] = {Field::timestamp(0x0102030405060708ull)};
  EXPECT_EQ(to_hex(encode_fields(f)), "0105000000080102030405060708");
  EXPECT_EQ(f[0].as_timestamp(), 0x0102030405060708ull);
}

TEST(EncodeFields, RejectsWrongFixedWidth) {
  EXPECT_THROW(Field::id(Bytes(15)), std::invalid_argument);
  EXPECT_THROW(Field::digest(Bytes(31)), std::invalid_argument);
  EXPECT_THROW(Field::point(Bytes(32)), std::invalid_argument);
  const Field bogus[] = {Field{FieldType::kScalar, Bytes(3)}};
  EXPECT_THROW(encode_fields(bogus), std::invalid_argument);
}

TEST(EncodeFields, MatchesIndependentEncoderAndRoundtrips) {
  crypto::DeterministicRandom rng(1);
  for (int i = 0; i < 1000; ++i) {
    const auto fields = random_fields(rng);
    std::vector<oracle::TaggedValue> tv;
    for (const auto& f : fields) tv.emplace_back(static_cast<std::uint8_t>(f.type), f.value);
    const Bytes enc = encode_fields(fields);
    ASSERT_EQ(enc, oracle::canonical_encode(tv));
    ASSERT_EQ(decode_fields(enc), fields);
  }
}

TEST(EncodeFields, InjectiveOnGeneratedLists) {
  crypto::DeterministicRandom rng(2);
  std::map<Bytes, std::vector<Field>> seen;
  for (int i = 0; i < 2000; ++i) {
    auto fields = random_fields(rng);
    // Bias towards collisions: tiny variable-length values.
    for (auto& f : fields) {
      if (!fixed_width(f.type)) f.value.resize(f.value.size() % 3);
    }
    const Bytes enc = encode_fields(fields);
    auto [it, inserted] = seen.emplace(enc, fields);
    if (!inserted) {
      EXPECT_EQ(it->second, fields);
    }
  }
}

TEST(DecodeFields, RejectsMalformedInput) {
  EXPECT_THROW(decode_fields({}), ParseError);
  EXPECT_THROW(decode_fields(Bytes{0x02}), ParseError);
  EXPECT_THROW(decode_fields(Bytes{0x01, 0x06, 0x00}), ParseError);
  EXPECT_THROW(decode_fields(Bytes{0x01, 0x09, 0, 0, 0, 0}), ParseError);
  EXPECT_THROW(decode_fields(Bytes{0x01, 0x04, 0, 0, 0, 5, 1, 2}), ParseError);
  EXPECT_THROW(decode_fields(Bytes{0x01, 0x04, 0xff, 0xff, 0xff, 0xff}), ParseError);
  EXPECT_THROW(decode_fields(Bytes{0x01, 0x06, 0, 0, 0, 1, 7}), ParseError);
  EXPECT_NO_THROW(decode_fields(Bytes{0x01, 0x04, 0, 0, 0, 0}));
}

Envelope sample_envelope(crypto::RandomSource& rng, MsgType type) {
  Envelope env;
  env.type = type;
  rng.fill(env.correlation);
  env.sender_hint = "ebake/dev/abc/inbox";
  std::vector<Field> payload;
  for (auto ft : payload_schema(type)) {
    if (ft == FieldType::kString) {
      payload.push_back(Field::string("ebake/session/" + to_hex(rng.bytes(16))));
    } else {
      payload.push_back(Field{ft, rng.bytes(fixed_width(ft).value_or(rng.uniform(0, 200)))});
    }
  }
  env.payload = encode_fields(payload);
  return env;
}

TEST(Envelope, RoundtripEveryMessageType) {
  crypto::DeterministicRandom rng(3);
  for (auto t : {MsgType::kMsg1, MsgType::kMsg2, MsgType::kMsg3, MsgType::kMsg4,
                 MsgType::kTopicNotice, MsgType::kDasMsg1, MsgType::kDasMsg2, MsgType::kDasMsg3}) {
    for (int i = 0; i < 125; ++i) {
      const Envelope env = sample_envelope(rng, t);
      EXPECT_EQ(decode_envelope(encode_envelope(env)), env) << msg_type_name(t);
    }
  }
}

TEST(Envelope, RejectsTruncationTrailingBytesAndUnknownType) {
  crypto::DeterministicRandom rng(4);
  const Envelope env = sample_envelope(rng, MsgType::kMsg2);
  const Bytes raw = encode_envelope(env);
  for (std::size_t cut = 0; cut < raw.size(); ++cut) {
    EXPECT_THROW(decode_envelope(ByteView(raw).first(cut)), ParseError) << cut;
  }
  Bytes trailing = raw;
  trailing.push_back(0x00);
  EXPECT_THROW(decode_envelope(trailing), ParseError);

  Envelope bad_payload = env;
  bad_payload.payload.push_back(0x07);
  EXPECT_THROW(decode_envelope(encode_envelope(bad_payload)), ParseError);

  Bytes bad_type = raw;
  bad_type[6] = 0x63;  // msg_type value byte
  EXPECT_THROW(decode_envelope(bad_type), ParseError);
}

TEST(Envelope, RejectsSchemaMismatch) {
  crypto::DeterministicRandom rng(5);
  Envelope env = sample_envelope(rng, MsgType::kMsg2);
  env.type = MsgType::kMsg4;  // M2 payload does not satisfy the M4 schema
  EXPECT_THROW(decode_envelope(encode_envelope(env)), ParseError);
}

TEST(Envelope, ArbitraryInputNeverCrashes) {
  crypto::DeterministicRandom rng(6);
  const Bytes valid = encode_envelope(sample_envelope(rng, MsgType::kMsg1));
  for (int i = 0; i < 3000; ++i) {
    Bytes input;
    switch (i % 3) {
      case 0: input = rng.bytes(rng.uniform(0, 65536 / 16)); break;
      case 1:
        input = valid;
        for (int k = 0; k < 4; ++k) input[rng.uniform(0, input.size() - 1)] = static_cast<std::uint8_t>(rng.next_u64());
        break;
      default:
        input = rng.bytes(rng.uniform(0, 64));
        if (!input.empty()) input[0] = 0x01;
    }
    try {
      (void)decode_envelope(input);
    } catch (const ParseError&) {
    }
  }
  Bytes big = rng.bytes(65536);
  big[0] = 0x01;
  EXPECT_THROW(decode_envelope(big), ParseError);
}

}  // namespace
