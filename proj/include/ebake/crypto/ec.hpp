// Copyright 2026 The EBAKE Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

// Group arithmetic on NIST P-256 (short Weierstrass y^2 = x^3 + ax + b over
// F_p). Point values are always on the curve: every constructor validates.

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include "ebake/crypto/bytes.hpp"
#include "ebake/crypto/random.hpp"

namespace ebake::crypto {

using Bytes32 = std::array<std::uint8_t, 32>;
using Compressed = std::array<std::uint8_t, 33>;

class InvalidPoint : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class InvalidScalar : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Big-endian constants of the curve.
struct CurveParams {
  std::string name;
  Bytes32 p;  // field prime
  Bytes32 a;
  Bytes32 b;
  Bytes32 gx;
  Bytes32 gy;
  Bytes32 n;  // group order
  unsigned cofactor;
};

const CurveParams& p256();

/// Integer in [1, n-1]. Wiped on destruction.
class Scalar {
 public:
  /// nullopt unless 32 bytes encoding a value in [1, n-1].
  static std::optional<Scalar> from_bytes(ByteView be);
  static Scalar from_bytes_checked(ByteView be);
  static Scalar from_u64(std::uint64_t v);
  /// Reduces an arbitrary big-endian integer mod n. Throws InvalidScalar if
  /// the result is zero.
  static Scalar reduce(ByteView be);

  Scalar(const Scalar&) = default;
  Scalar& operator=(const Scalar&) = default;
  ~Scalar();

  const Bytes32& bytes() const { return be_; }

  Scalar add(const Scalar& o) const;
  Scalar mul(const Scalar& o) const;

  bool operator==(const Scalar& o) const;

 private:
  explicit Scalar(const Bytes32& be) : be_(be) {}
  Bytes32 be_{};
};

class Point {
 public:
  /// The identity.
  Point() = default;
  static Point identity() { return Point(); }
  /// Throws InvalidPoint if (x, y) is not on the curve.
  static Point from_affine(const Bytes32& x, const Bytes32& y);
  /// 0x02/0x03 || x. Throws InvalidPoint on any other input.
  static Point decompress(ByteView encoded);

  bool is_identity() const { return infinity_; }
  const Bytes32& x() const { return x_; }
  const Bytes32& y() const { return y_; }

  /// Throws InvalidPoint for the identity, which has no compressed form.
  Compressed compressed() const;
  Bytes compressed_bytes() const;

  Point negate() const;

  bool operator==(const Point& o) const = default;

 private:
  bool infinity_ = true;
  Bytes32 x_{};
  Bytes32 y_{};
};

Point generator();

/// k * q. Constant time in k.
Point scalar_mult(const Scalar& k, const Point& q);
/// k * generator().
Point base_mult(const Scalar& k);
Point point_add(const Point& a, const Point& b);

Scalar random_scalar(RandomSource& rng);

inline constexpr std::size_t kNonceSize = 16;
Bytes random_nonce(RandomSource& rng, std::size_t len = kNonceSize);

namespace detail {
// Uncounted variants for use inside other primitives.
Point mul(const Scalar& k, const Point& q);
Point mul_base(const Scalar& k);
Point add(const Point& a, const Point& b);
}  // namespace detail

}  // namespace ebake::crypto
