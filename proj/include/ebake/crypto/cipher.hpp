// Copyright 2026 The EBAKE Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

// Symmetric AEAD under the 160-bit shared key and ECIES-style hybrid
// encryption to a curve point.

#pragma once

#include <array>
#include <stdexcept>

#include "ebake/crypto/ec.hpp"
#include "ebake/crypto/hash.hpp"

namespace ebake::crypto {

class AuthenticationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DecryptionError : public AuthenticationError {
 public:
  using AuthenticationError::AuthenticationError;
};

inline constexpr std::size_t kSymKeySize = 20;
inline constexpr std::size_t kAeadNonceSize = 12;
inline constexpr std::size_t kAeadTagSize = 16;

/// 160-bit shared secret. The AES-256-GCM key is
/// sha256 framing of ("EBAKE-symkey", [bytes(raw)]).
class SymKey {
 public:
  static SymKey from_bytes(ByteView raw);
  static SymKey generate(RandomSource& rng);

  SymKey(const SymKey&) = default;
  SymKey& operator=(const SymKey&) = default;
  ~SymKey();

  const std::array<std::uint8_t, kSymKeySize>& raw() const { return raw_; }
  const std::array<std::uint8_t, 32>& cipher_key() const { return cipher_key_; }

  bool operator==(const SymKey& o) const { return ct_equal(raw_, o.raw_); }

 private:
  SymKey() = default;
  std::array<std::uint8_t, kSymKeySize> raw_{};
  std::array<std::uint8_t, 32> cipher_key_{};
};

/// nonce(12) || ciphertext || tag(16). Counted.
Bytes sym_encrypt(const SymKey& key, ByteView plaintext, RandomSource& rng);
/// Throws AuthenticationError on a bad tag or malformed input. Counted.
Bytes sym_decrypt(const SymKey& key, ByteView ciphertext);

struct HybridCiphertext {
  Compressed ephemeral{};
  std::array<std::uint8_t, kAeadNonceSize> nonce{};
  Bytes body;
  std::array<std::uint8_t, kAeadTagSize> tag{};

  /// ephemeral(33) || nonce(12) || body || tag(16)
  Bytes serialize() const;
  /// Throws DecryptionError if shorter than 61 bytes.
  static HybridCiphertext parse(ByteView raw);

  bool operator==(const HybridCiphertext&) const = default;
};

inline constexpr std::size_t kHybridOverhead = 33 + kAeadNonceSize + kAeadTagSize;

/// Fresh ephemeral e per call; AEAD key = framed hash of ("EBAKE-ecies",
/// [bytes(x(e*pub)), point(e*G)]); the compressed ephemeral point is bound
/// as associated data. Counted.
HybridCiphertext asym_encrypt(const Point& pub, ByteView plaintext, RandomSource& rng);
/// Throws DecryptionError on an off-curve ephemeral point or bad tag. Counted.
Bytes asym_decrypt(const Scalar& priv, const HybridCiphertext& ct);
Bytes asym_decrypt(const Scalar& priv, ByteView serialized);

}  // namespace ebake::crypto
