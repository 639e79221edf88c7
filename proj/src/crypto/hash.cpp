// Copyright 2026 The EBAKE Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "ebake/crypto/hash.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <vector>

#include "ebake/crypto/counters.hpp"
#include "openssl_util.hpp"

namespace ebake::crypto {

Digest Digest::from_bytes(ByteView b) {
  if (b.size() != 32) throw std::invalid_argument("digest must be 32 bytes");
  Digest d;
  std::copy(b.begin(), b.end(), d.bytes.begin());
  return d;
}

namespace detail {

Digest sha256(ByteView data) {
  Digest d;
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), d.bytes.data(), &len, EVP_sha256(), nullptr) != 1 ||
      len != d.bytes.size()) {
    ossl::fail("EVP_Digest");
  }
  return d;
}

Digest framed_hash(std::string_view domain_tag, std::span<const codec::Field> fields) {
  std::vector<codec::Field> all;
  all.reserve(fields.size() + 1);
  all.push_back(codec::Field::string(domain_tag));
  all.insert(all.end(), fields.begin(), fields.end());
  return sha256(codec::encode_fields(all));
}

}  // namespace detail

Digest hash(std::string_view domain_tag, std::span<const codec::Field> fields) {
  detail::record(Op::kHash);
  return detail::framed_hash(domain_tag, fields);
}

Digest hash(std::string_view domain_tag, std::initializer_list<codec::Field> fields) {
  return hash(domain_tag, std::span<const codec::Field>(fields.begin(), fields.size()));
}

Bytes expand_mask(const Digest& d, std::size_t len) {
  if (len > kMaxMaskLength) throw std::invalid_argument("mask length exceeds 255 blocks");
  Bytes out;
  out.reserve(len);
  for (std::uint8_t counter = 1; out.size() < len; ++counter) {
    const codec::Field fields[] = {to_field(d), codec::Field::bytes(ByteView(&counter, 1))};
    const Digest block = detail::framed_hash("EBAKE-mask", fields);
    const std::size_t take = std::min(block.bytes.size(), len - out.size());
    out.insert(out.end(), block.bytes.begin(), block.bytes.begin() + static_cast<std::ptrdiff_t>(take));
  }
  return out;
}

Bytes xor_mask(const Digest& d, ByteView data) {
  detail::record(Op::kXor);
  Bytes out = expand_mask(d, data.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] ^= data[i];
  return out;
}

codec::Field to_field(const Scalar& s) { return codec::Field::scalar(s.bytes()); }
codec::Field to_field(const Point& p) { return codec::Field::point(p.compressed()); }
codec::Field to_field(const Digest& d) { return codec::Field::digest(d.bytes); }

}  // namespace ebake::crypto
