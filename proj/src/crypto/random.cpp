// Copyright 2026 The EBAKE Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "ebake/crypto/random.hpp"

#include <openssl/rand.h>

#include <algorithm>
#include <limits>

#include "ebake/codec/fields.hpp"
#include "ebake/crypto/hash.hpp"

namespace ebake::crypto {

Bytes RandomSource::bytes(std::size_t n) {
  Bytes out(n);
  if (n != 0) fill(out);
  return out;
}

std::uint64_t RandomSource::next_u64() {
  std::array<std::uint8_t, 8> b{};
  fill(b);
  return codec::get_u64(b);
}

double RandomSource::uniform01() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t RandomSource::uniform(std::uint64_t lo, std::uint64_t hi) {
  if (lo > hi) throw std::invalid_argument("uniform: empty range");
  const std::uint64_t span = hi - lo;
  if (span == std::numeric_limits<std::uint64_t>::max()) return next_u64();
  const std::uint64_t range = span + 1;
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % range;
  for (;;) {
    const std::uint64_t v = next_u64();
    if (v < limit) return lo + v % range;
  }
}

void SystemRandom::fill(std::span<std::uint8_t> out) {
  if (out.empty()) return;
  if (RAND_bytes(out.data(), static_cast<int>(out.size())) != 1) {
    throw EntropyError("system entropy source failed");
  }
}

DeterministicRandom::DeterministicRandom(std::uint64_t seed) : seed_(seed) {}

void DeterministicRandom::fill(std::span<std::uint8_t> out) {
  std::lock_guard lock(mu_);
  std::size_t pos = 0;
  while (pos < out.size()) {
    if (used_ == block_.size()) {
      Bytes input;
      codec::put_u64(input, seed_);
      codec::put_u64(input, counter_++);
      block_ = detail::sha256(input).bytes;
      used_ = 0;
    }
    const std::size_t take = std::min(out.size() - pos, block_.size() - used_);
    std::copy_n(block_.begin() + static_cast<std::ptrdiff_t>(used_), take, out.begin() + static_cast<std::ptrdiff_t>(pos));
    used_ += take;
    pos += take;
  }
}

RandomSource& system_random() {
  static SystemRandom instance;
  return instance;
}

}  // namespace ebake::crypto
