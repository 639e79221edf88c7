// Copyright 2026 The EBAKE Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <initializer_list>
#include <span>
#include <string_view>

#include "ebake/codec/fields.hpp"
#include "ebake/crypto/ec.hpp"

namespace ebake::crypto {

struct Digest {
  std::array<std::uint8_t, 32> bytes{};

  /// Constant-time.
  bool operator==(const Digest& o) const { return ct_equal(bytes, o.bytes); }
  std::string hex() const { return to_hex(bytes); }
  static Digest from_bytes(ByteView b);
};

/// SHA-256 over encode_fields([string(domain_tag), fields...]). Counted.
Digest hash(std::string_view domain_tag, std::span<const codec::Field> fields);
Digest hash(std::string_view domain_tag, std::initializer_list<codec::Field> fields);

inline constexpr std::size_t kMaxMaskLength = 255 * 32;

/// Counter-mode expansion: block i (1-based, one byte) is
/// hash("EBAKE-mask", [digest(d), bytes({i})]); blocks are concatenated and
/// truncated to len. Uncounted; throws std::invalid_argument if len exceeds
/// kMaxMaskLength.
Bytes expand_mask(const Digest& d, std::size_t len);

/// data XOR expand_mask(d, data.size()). Counted as one xor operation.
Bytes xor_mask(const Digest& d, ByteView data);

codec::Field to_field(const Scalar& s);
codec::Field to_field(const Point& p);
codec::Field to_field(const Digest& d);

namespace detail {
Digest sha256(ByteView data);
/// hash() without counting.
Digest framed_hash(std::string_view domain_tag, std::span<const codec::Field> fields);
}  // namespace detail

}  // namespace ebake::crypto
