// Copyright 2026 The EBAKE Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

// Test-only affine P-256 arithmetic on GMP integers. Shares no code with the
// library's curve implementation; used as the independent reference.

#pragma once

#include <gmpxx.h>

#include <array>
#include <cstdint>
#include <string>

namespace oracle {

struct AffinePoint {
  bool infinity = true;
  mpz_class x;
  mpz_class y;

  bool operator==(const AffinePoint& o) const {
    if (infinity || o.infinity) return infinity == o.infinity;
    return x == o.x && y == o.y;
  }
};

class P256 {
 public:
  P256();

  const mpz_class& p() const { return p_; }
  const mpz_class& a() const { return a_; }
  const mpz_class& b() const { return b_; }
  const mpz_class& n() const { return n_; }
  const AffinePoint& g() const { return g_; }

  bool on_curve(const AffinePoint& pt) const;
  AffinePoint add(const AffinePoint& l, const AffinePoint& r) const;
  AffinePoint negate(const AffinePoint& pt) const;
  /// k-fold repeated addition; O(k), for small k.
  AffinePoint repeated_add(std::uint64_t k, const AffinePoint& pt) const;
  /// Left-to-right double-and-add.
  AffinePoint double_and_add(const mpz_class& k, const AffinePoint& pt) const;
  /// 4a^3 + 27b^2 mod p.
  mpz_class discriminant_term() const;

 private:
  mpz_class mod(const mpz_class& v) const;
  mpz_class inv(const mpz_class& v) const;

  mpz_class p_, a_, b_, n_;
  AffinePoint g_;
};

mpz_class from_hex(const std::string& hex);
std::array<std::uint8_t, 32> to_be32(const mpz_class& v);
mpz_class from_be(const std::uint8_t* data, std::size_t len);

}  // namespace oracle
