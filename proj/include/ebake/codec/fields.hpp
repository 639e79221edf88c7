// Copyright 2026 The EBAKE Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

// Canonical length-prefixed framing shared by hashing, encryption payloads
// and the wire. Layout: version byte 0x01, then per field a 1-byte type tag,
// a 4-byte big-endian length and the raw value bytes.

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ebake/crypto/bytes.hpp"

namespace ebake::codec {

inline constexpr std::uint8_t kEncodingVersion = 0x01;

enum class FieldType : std::uint8_t {
  kScalar = 0x01,     // 32 bytes, big-endian
  kPoint = 0x02,      // 33 bytes, compressed SEC1
  kDigest = 0x03,     // 32 bytes
  kBytes = 0x04,      // variable
  kTimestamp = 0x05,  // 8 bytes, big-endian ms since Unix epoch
  kId = 0x06,         // 16 bytes
  kString = 0x07,     // variable, UTF-8
};

std::string_view type_name(FieldType t);

/// Width for fixed-size types, nullopt for kBytes/kString.
std::optional<std::size_t> fixed_width(FieldType t);

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Field {
  FieldType type = FieldType::kBytes;
  Bytes value;

  static Field scalar(ByteView be32);
  static Field point(ByteView compressed33);
  static Field digest(ByteView d32);
  static Field bytes(ByteView b);
  static Field timestamp(std::uint64_t ms);
  static Field id(ByteView id16);
  static Field string(std::string_view s);

  std::uint64_t as_timestamp() const;
  std::string as_string() const;

  bool operator==(const Field&) const = default;
};

/// Throws std::invalid_argument if a fixed-width field has the wrong size.
Bytes encode_fields(std::span<const Field> fields);

/// Throws ParseError on a bad version, unknown tag, truncation, a length
/// that overruns the input or a fixed-width mismatch.
std::vector<Field> decode_fields(ByteView raw);

/// Sequential typed access to a decoded field list.
class FieldReader {
 public:
  explicit FieldReader(std::span<const Field> fields) : fields_(fields) {}

  const Bytes& next(FieldType expected);
  std::uint64_t next_timestamp();
  std::string next_string();
  /// Throws ParseError if fields remain.
  void finish() const;

 private:
  std::span<const Field> fields_;
  std::size_t pos_ = 0;
};

void put_u32(Bytes& out, std::uint32_t v);
void put_u64(Bytes& out, std::uint64_t v);
std::uint32_t get_u32(ByteView in);
std::uint64_t get_u64(ByteView in);

}  // namespace ebake::codec
