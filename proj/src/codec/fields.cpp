// Copyright 2026 The EBAKE Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "ebake/codec/fields.hpp"

#include <limits>

namespace ebake::codec {

std::string_view type_name(FieldType t) {
  switch (t) {
    case FieldType::kScalar: return "scalar";
    case FieldType::kPoint: return "point";
    case FieldType::kDigest: return "digest";
    case FieldType::kBytes: return "bytes";
    case FieldType::kTimestamp: return "timestamp";
    case FieldType::kId: return "id";
    case FieldType::kString: return "string";
  }
  return "unknown";
}

std::optional<std::size_t> fixed_width(FieldType t) {
  switch (t) {
    case FieldType::kScalar: return 32;
    case FieldType::kPoint: return 33;
    case FieldType::kDigest: return 32;
    case FieldType::kTimestamp: return 8;
    case FieldType::kId: return 16;
    case FieldType::kBytes:
    case FieldType::kString: return std::nullopt;
  }
  return std::nullopt;
}

namespace {

bool known_tag(std::uint8_t tag) {
  return tag >= static_cast<std::uint8_t>(FieldType::kScalar) &&
         tag <= static_cast<std::uint8_t>(FieldType::kString);
}

Field make(FieldType type, ByteView value) {
  if (auto w = fixed_width(type); w && value.size() != *w) {
    throw std::invalid_argument("field " + std::string(type_name(type)) + " must be " +
                                std::to_string(*w) + " bytes, got " +
                                std::to_string(value.size()));
  }
  return Field{type, Bytes(value.begin(), value.end())};
}

}  // namespace

Field Field::scalar(ByteView be32) { return make(FieldType::kScalar, be32); }
Field Field::point(ByteView compressed33) { return make(FieldType::kPoint, compressed33); }
Field Field::digest(ByteView d32) { return make(FieldType::kDigest, d32); }
Field Field::bytes(ByteView b) { return make(FieldType::kBytes, b); }
Field Field::id(ByteView id16) { return make(FieldType::kId, id16); }
Field Field::string(std::string_view s) { return make(FieldType::kString, as_view(s)); }

Field Field::timestamp(std::uint64_t ms) {
  Field f{FieldType::kTimestamp, {}};
  put_u64(f.value, ms);
  return f;
}

std::uint64_t Field::as_timestamp() const {
  if (type != FieldType::kTimestamp || value.size() != 8) {
    throw ParseError("field is not a timestamp");
  }
  return get_u64(value);
}

std::string Field::as_string() const {
  if (type != FieldType::kString) throw ParseError("field is not a string");
  return std::string(value.begin(), value.end());
}

void put_u32(Bytes& out, std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

void put_u64(Bytes& out, std::uint64_t v) {
  for (int shift = 56; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

std::uint32_t get_u32(ByteView in) {
  std::uint32_t v = 0;
  for (std::size_t i = 0; i < 4; ++i) v = (v << 8) | in[i];
  return v;
}

std::uint64_t get_u64(ByteView in) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < 8; ++i) v = (v << 8) | in[i];
  return v;
}

Bytes encode_fields(std::span<const Field> fields) {
  std::size_t total = 1;
  for (const auto& f : fields) total += 5 + f.value.size();
  Bytes out;
  out.reserve(total);
  out.push_back(kEncodingVersion);
  for (const auto& f : fields) {
    if (auto w = fixed_width(f.type); w && f.value.size() != *w) {
      throw std::invalid_argument("fixed-width field has wrong size");
    }
    if (f.value.size() > std::numeric_limits<std::uint32_t>::max()) {
      throw std::invalid_argument("field too long");
    }
    out.push_back(static_cast<std::uint8_t>(f.type));
    put_u32(out, static_cast<std::uint32_t>(f.value.size()));
    out.insert(out.end(), f.value.begin(), f.value.end());
  }
  return out;
}

std::vector<Field> decode_fields(ByteView raw) {
  if (raw.empty()) throw ParseError("empty encoding");
  if (raw[0] != kEncodingVersion) throw ParseError("unsupported encoding version");
  std::vector<Field> fields;
  std::size_t pos = 1;
  while (pos < raw.size()) {
    if (raw.size() - pos < 5) throw ParseError("truncated field header");
    const std::uint8_t tag = raw[pos];
    if (!known_tag(tag)) throw ParseError("unknown field tag");
    const std::uint32_t len = get_u32(raw.subspan(pos + 1, 4));
    pos += 5;
    if (len > raw.size() - pos) throw ParseError("field length overruns input");
    const auto type = static_cast<FieldType>(tag);
    if (auto w = fixed_width(type); w && len != *w) {
      throw ParseError("fixed-width field has wrong length");
    }
    const auto value = raw.subspan(pos, len);
    fields.push_back(Field{type, Bytes(value.begin(), value.end())});
    pos += len;
  }
  return fields;
}

const Bytes& FieldReader::next(FieldType expected) {
  if (pos_ >= fields_.size()) throw ParseError("missing field");
  const Field& f = fields_[pos_];
  if (f.type != expected) {
    throw ParseError("expected " + std::string(type_name(expected)) + " field, got " +
                     std::string(type_name(f.type)));
  }
  ++pos_;
  return f.value;
}

std::uint64_t FieldReader::next_timestamp() { return get_u64(next(FieldType::kTimestamp)); }

std::string FieldReader::next_string() {
  const auto& v = next(FieldType::kString);
  return std::string(v.begin(), v.end());
}

void FieldReader::finish() const {
  if (pos_ != fields_.size()) throw ParseError("unexpected trailing fields");
}

}  // namespace ebake::codec
