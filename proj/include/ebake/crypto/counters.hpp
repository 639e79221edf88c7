// Copyright 2026 The EBAKE Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

// Primitive-operation counting. Counted entry points (hash, sym/asym
// encrypt/decrypt, xor_mask, scalar_mult, base_mult, point_add) record into
// the OpCounters bound to the calling thread by the innermost CountingScope.
// Building with EBAKE_ENABLE_OP_COUNTERS=0 compiles the hooks away.

#pragma once

#include <cstdint>
#include <string>

#ifndef EBAKE_ENABLE_OP_COUNTERS
#define EBAKE_ENABLE_OP_COUNTERS 1
#endif

namespace ebake::crypto {

struct OpCounters {
  std::uint64_t sym = 0;        // symmetric encryption/decryption
  std::uint64_t asym = 0;       // hybrid public-key encryption/decryption
  std::uint64_t hash = 0;       // protocol-level hash invocations
  std::uint64_t xor_ops = 0;    // masked XOR
  std::uint64_t point_mul = 0;  // scalar multiplication
  std::uint64_t point_add = 0;  // point addition

  OpCounters& operator+=(const OpCounters& o);
  friend OpCounters operator+(OpCounters a, const OpCounters& b) { return a += b; }
  bool operator==(const OpCounters&) const = default;
  void reset() { *this = OpCounters{}; }
  std::string to_string() const;
};

enum class Op { kSym, kAsym, kHash, kXor, kPointMul, kPointAdd };

class CountingScope {
 public:
  explicit CountingScope(OpCounters& sink);
  ~CountingScope();
  CountingScope(const CountingScope&) = delete;
  CountingScope& operator=(const CountingScope&) = delete;

 private:
  OpCounters* previous_;
};

namespace detail {
#if EBAKE_ENABLE_OP_COUNTERS
void record(Op op);
#else
inline void record(Op) {}
#endif
}  // namespace detail

}  // namespace ebake::crypto
