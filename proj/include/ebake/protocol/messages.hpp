// Copyright 2026 The EBAKE Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "ebake/codec/envelope.hpp"
#include "ebake/crypto/hash.hpp"

namespace ebake::protocol {

inline constexpr std::string_view kTagDp1 = "EBAKE-DP1";
inline constexpr std::string_view kTagPdx = "EBAKE-Pdx";
inline constexpr std::string_view kTagPdy = "EBAKE-Pdy";
inline constexpr std::string_view kTagPdta = "EBAKE-PdTA";
inline constexpr std::string_view kTagPdxx = "EBAKE-Pdxx";
inline constexpr std::string_view kTagSk = "EBAKE-SK";

inline constexpr std::size_t kMaskedPointSize = 33;

// Payload structs. from_payload throws codec::ParseError on schema or width
// violations.

struct Msg1 {
  Bytes w;
  Bytes y;  // 33 bytes
  Bytes z;  // serialized HybridCiphertext
  crypto::Digest p_dx;
  std::uint64_t t1 = 0;

  Bytes to_payload() const;
  static Msg1 from_payload(ByteView payload);
};

struct Msg2 {
  Bytes z;
  crypto::Digest p_dy;
  std::uint64_t t2 = 0;

  Bytes to_payload() const;
  static Msg2 from_payload(ByteView payload);
};

struct Msg3 {
  Bytes z_y;
  crypto::Digest p_dta;
  std::uint64_t t3 = 0;

  Bytes to_payload() const;
  static Msg3 from_payload(ByteView payload);
};

struct Msg4 {
  Bytes z_y;
  crypto::Digest p_dxx;
  std::uint64_t t4 = 0;
  std::string topic;

  Bytes to_payload() const;
  static Msg4 from_payload(ByteView payload);
};

struct TopicNotice {
  std::string topic;

  Bytes to_payload() const;
  static TopicNotice from_payload(ByteView payload);
};

/// A message ready for the transport: destination topic plus envelope.
struct Outbound {
  std::string topic;
  codec::Envelope envelope;
};

}  // namespace ebake::protocol
