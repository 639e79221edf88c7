// Copyright 2026 The EBAKE Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <mutex>
#include <span>
#include <stdexcept>

#include "ebake/crypto/bytes.hpp"

namespace ebake::crypto {

class EntropyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Byte source for keys, nonces and ephemeral scalars. Implementations must
/// be safe to call from several threads.
class RandomSource {
 public:
  virtual ~RandomSource() = default;
  virtual void fill(std::span<std::uint8_t> out) = 0;

  Bytes bytes(std::size_t n);
  std::uint64_t next_u64();
  /// Uniform in [0, 1).
  double uniform01();
  /// Uniform in [lo, hi] (inclusive).
  std::uint64_t uniform(std::uint64_t lo, std::uint64_t hi);
};

/// OS entropy via the OpenSSL CSPRNG. Throws EntropyError if it fails.
class SystemRandom final : public RandomSource {
 public:
  void fill(std::span<std::uint8_t> out) override;
};

/// Reproducible SHA-256 counter-mode stream keyed by a 64-bit seed. For
/// scripted attacks and tests only.
class DeterministicRandom final : public RandomSource {
 public:
  explicit DeterministicRandom(std::uint64_t seed);
  void fill(std::span<std::uint8_t> out) override;

 private:
  std::mutex mu_;
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
  std::array<std::uint8_t, 32> block_{};
  std::size_t used_ = 32;
};

RandomSource& system_random();

}  // namespace ebake::crypto
