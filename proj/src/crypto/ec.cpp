// Copyright 2026 The EBAKE Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "ebake/crypto/ec.hpp"

#include <openssl/crypto.h>
#include <openssl/obj_mac.h>

#include <algorithm>

#include "ebake/crypto/counters.hpp"
#include "openssl_util.hpp"

namespace ebake::crypto {

using namespace ossl;

namespace {

Bytes32 b32(std::string_view hex) {
  const Bytes raw = from_hex(hex);
  Bytes32 out{};
  std::copy(raw.begin(), raw.end(), out.begin());
  return out;
}

const EC_GROUP* group() {
  static const GroupPtr g = [] {
    GroupPtr grp(EC_GROUP_new_by_curve_name(NID_X9_62_prime256v1));
    if (!grp) fail("EC_GROUP_new_by_curve_name");
    return grp;
  }();
  return g.get();
}

BN_CTX* ctx() {
  thread_local CtxPtr c(BN_CTX_new());
  if (!c) fail("BN_CTX_new");
  return c.get();
}

const BIGNUM* order() { return EC_GROUP_get0_order(group()); }

BnPtr to_bn(ByteView be) {
  BnPtr b(BN_bin2bn(be.data(), static_cast<int>(be.size()), nullptr));
  if (!b) fail("BN_bin2bn");
  return b;
}

Bytes32 from_bn(const BIGNUM* b) {
  Bytes32 out{};
  if (BN_bn2binpad(b, out.data(), static_cast<int>(out.size())) != 32) fail("BN_bn2binpad");
  return out;
}

PointPtr new_point() {
  PointPtr p(EC_POINT_new(group()));
  if (!p) fail("EC_POINT_new");
  return p;
}

PointPtr to_ec(const Point& p) {
  PointPtr out = new_point();
  if (p.is_identity()) {
    if (EC_POINT_set_to_infinity(group(), out.get()) != 1) fail("EC_POINT_set_to_infinity");
    return out;
  }
  auto x = to_bn(p.x());
  auto y = to_bn(p.y());
  if (EC_POINT_set_affine_coordinates(group(), out.get(), x.get(), y.get(), ctx()) != 1) {
    throw InvalidPoint("point is not on the curve");
  }
  return out;
}

Point from_ec(const EC_POINT* p) {
  if (EC_POINT_is_at_infinity(group(), p) == 1) return Point::identity();
  auto x = new_bn();
  auto y = new_bn();
  if (EC_POINT_get_affine_coordinates(group(), p, x.get(), y.get(), ctx()) != 1) {
    fail("EC_POINT_get_affine_coordinates");
  }
  return Point::from_affine(from_bn(x.get()), from_bn(y.get()));
}

}  // namespace

const CurveParams& p256() {
  static const CurveParams params{
      "P-256",
      b32("ffffffff00000001000000000000000000000000ffffffffffffffffffffffff"),
      b32("ffffffff00000001000000000000000000000000fffffffffffffffffffffffc"),
      b32("5ac635d8aa3a93e7b3ebbd55769886bc651d06b0cc53b0f63bce3c3e27d2604b"),
      b32("6b17d1f2e12c4247f8bce6e563a440f277037d812deb33a0f4a13945d898c296"),
      b32("4fe342e2fe1a7f9b8ee7eb4a7c0f9e162bce33576b315ececbb6406837bf51f5"),
      b32("ffffffff00000000ffffffffffffffffbce6faada7179e84f3b9cac2fc632551"),
      1,
  };
  return params;
}

// ---- Scalar ----

std::optional<Scalar> Scalar::from_bytes(ByteView be) {
  if (be.size() != 32) return std::nullopt;
  auto v = to_bn(be);
  if (BN_is_zero(v.get()) || BN_cmp(v.get(), order()) >= 0) return std::nullopt;
  Bytes32 raw{};
  std::copy(be.begin(), be.end(), raw.begin());
  return Scalar(raw);
}

Scalar Scalar::from_bytes_checked(ByteView be) {
  auto s = from_bytes(be);
  if (!s) throw InvalidScalar("scalar out of range [1, n-1]");
  return *s;
}

Scalar Scalar::from_u64(std::uint64_t v) {
  if (v == 0) throw InvalidScalar("scalar must be nonzero");
  Bytes32 raw{};
  for (int i = 0; i < 8; ++i) raw[31 - i] = static_cast<std::uint8_t>(v >> (8 * i));
  return Scalar(raw);
}

Scalar Scalar::reduce(ByteView be) {
  auto v = to_bn(be);
  auto r = new_bn();
  if (BN_nnmod(r.get(), v.get(), order(), ctx()) != 1) fail("BN_nnmod");
  if (BN_is_zero(r.get())) throw InvalidScalar("reduced scalar is zero");
  return Scalar(from_bn(r.get()));
}

Scalar::~Scalar() { OPENSSL_cleanse(be_.data(), be_.size()); }

Scalar Scalar::add(const Scalar& o) const {
  auto a = to_bn(be_);
  auto b = to_bn(o.be_);
  auto r = new_bn();
  if (BN_mod_add(r.get(), a.get(), b.get(), order(), ctx()) != 1) fail("BN_mod_add");
  if (BN_is_zero(r.get())) throw InvalidScalar("scalar sum is zero");
  return Scalar(from_bn(r.get()));
}

Scalar Scalar::mul(const Scalar& o) const {
  auto a = to_bn(be_);
  auto b = to_bn(o.be_);
  auto r = new_bn();
  if (BN_mod_mul(r.get(), a.get(), b.get(), order(), ctx()) != 1) fail("BN_mod_mul");
  if (BN_is_zero(r.get())) throw InvalidScalar("scalar product is zero");
  return Scalar(from_bn(r.get()));
}

bool Scalar::operator==(const Scalar& o) const { return ct_equal(be_, o.be_); }

// ---- Point ----

Point Point::from_affine(const Bytes32& x, const Bytes32& y) {
  auto bx = to_bn(x);
  auto by = to_bn(y);
  auto pt = new_point();
  if (EC_POINT_set_affine_coordinates(group(), pt.get(), bx.get(), by.get(), ctx()) != 1 ||
      EC_POINT_is_on_curve(group(), pt.get(), ctx()) != 1) {
    throw InvalidPoint("point is not on the curve");
  }
  Point p;
  p.infinity_ = false;
  p.x_ = x;
  p.y_ = y;
  return p;
}

Point Point::decompress(ByteView encoded) {
  if (encoded.size() != 33 || (encoded[0] != 0x02 && encoded[0] != 0x03)) {
    throw InvalidPoint("compressed point must be 33 bytes with prefix 0x02 or 0x03");
  }
  auto pt = new_point();
  if (EC_POINT_oct2point(group(), pt.get(), encoded.data(), encoded.size(), ctx()) != 1) {
    throw InvalidPoint("no curve point with this x-coordinate");
  }
  return from_ec(pt.get());
}

Compressed Point::compressed() const {
  if (infinity_) throw InvalidPoint("identity has no compressed encoding");
  Compressed out{};
  out[0] = static_cast<std::uint8_t>(0x02 | (y_[31] & 1));
  std::copy(x_.begin(), x_.end(), out.begin() + 1);
  return out;
}

Bytes Point::compressed_bytes() const { return to_bytes(compressed()); }

Point Point::negate() const {
  if (infinity_) return *this;
  auto pt = to_ec(*this);
  if (EC_POINT_invert(group(), pt.get(), ctx()) != 1) fail("EC_POINT_invert");
  return from_ec(pt.get());
}

Point generator() { return from_ec(EC_GROUP_get0_generator(group())); }

namespace detail {

Point mul(const Scalar& k, const Point& q) {
  auto bk = to_bn(k.bytes());
  BN_set_flags(bk.get(), BN_FLG_CONSTTIME);
  auto in = to_ec(q);
  auto out = new_point();
  if (EC_POINT_mul(group(), out.get(), nullptr, in.get(), bk.get(), ctx()) != 1) {
    fail("EC_POINT_mul");
  }
  return from_ec(out.get());
}

Point mul_base(const Scalar& k) {
  auto bk = to_bn(k.bytes());
  BN_set_flags(bk.get(), BN_FLG_CONSTTIME);
  auto out = new_point();
  if (EC_POINT_mul(group(), out.get(), bk.get(), nullptr, nullptr, ctx()) != 1) {
    fail("EC_POINT_mul");
  }
  return from_ec(out.get());
}

Point add(const Point& a, const Point& b) {
  auto pa = to_ec(a);
  auto pb = to_ec(b);
  auto out = new_point();
  if (EC_POINT_add(group(), out.get(), pa.get(), pb.get(), ctx()) != 1) fail("EC_POINT_add");
  return from_ec(out.get());
}

}  // namespace detail

Point scalar_mult(const Scalar& k, const Point& q) {
  detail::record(Op::kPointMul);
  return detail::mul(k, q);
}

Point base_mult(const Scalar& k) {
  detail::record(Op::kPointMul);
  return detail::mul_base(k);
}

Point point_add(const Point& a, const Point& b) {
  detail::record(Op::kPointAdd);
  return detail::add(a, b);
}

Scalar random_scalar(RandomSource& rng) {
  Bytes32 buf{};
  for (;;) {
    rng.fill(buf);
    if (auto s = Scalar::from_bytes(buf)) {
      OPENSSL_cleanse(buf.data(), buf.size());
      return *s;
    }
  }
}

Bytes random_nonce(RandomSource& rng, std::size_t len) { return rng.bytes(len); }

}  // namespace ebake::crypto
