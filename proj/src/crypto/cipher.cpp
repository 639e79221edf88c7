// Copyright 2026 The EBAKE Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "ebake/crypto/cipher.hpp"

#include <openssl/crypto.h>
#include <openssl/evp.h>

#include <algorithm>

#include "ebake/crypto/counters.hpp"
#include "openssl_util.hpp"

namespace ebake::crypto {

namespace {

using Key32 = std::array<std::uint8_t, 32>;
using Nonce = std::array<std::uint8_t, kAeadNonceSize>;
using Tag = std::array<std::uint8_t, kAeadTagSize>;

int as_int(std::size_t n) {
  if (n > static_cast<std::size_t>(INT32_MAX)) throw std::invalid_argument("input too large");
  return static_cast<int>(n);
}

// AES-256-GCM seal; returns ciphertext body, writes tag.
Bytes gcm_seal(const Key32& key, const Nonce& nonce, ByteView aad, ByteView pt, Tag& tag) {
  ossl::CipherCtxPtr c(EVP_CIPHER_CTX_new());
  if (!c) ossl::fail("EVP_CIPHER_CTX_new");
  Bytes body(pt.size());
  int len = 0;
  if (EVP_EncryptInit_ex(c.get(), EVP_aes_256_gcm(), nullptr, nullptr, nullptr) != 1 ||
      EVP_CIPHER_CTX_ctrl(c.get(), EVP_CTRL_GCM_SET_IVLEN, as_int(nonce.size()), nullptr) != 1 ||
      EVP_EncryptInit_ex(c.get(), nullptr, nullptr, key.data(), nonce.data()) != 1) {
    ossl::fail("gcm init");
  }
  if (!aad.empty() &&
      EVP_EncryptUpdate(c.get(), nullptr, &len, aad.data(), as_int(aad.size())) != 1) {
    ossl::fail("gcm aad");
  }
  if (!pt.empty() &&
      EVP_EncryptUpdate(c.get(), body.data(), &len, pt.data(), as_int(pt.size())) != 1) {
    ossl::fail("gcm update");
  }
  int fin = 0;
  if (EVP_EncryptFinal_ex(c.get(), body.data() + body.size(), &fin) != 1 ||
      EVP_CIPHER_CTX_ctrl(c.get(), EVP_CTRL_GCM_GET_TAG, as_int(tag.size()), tag.data()) != 1) {
    ossl::fail("gcm final");
  }
  return body;
}

// Returns false on tag mismatch.
bool gcm_open(const Key32& key, ByteView nonce, ByteView aad, ByteView body, ByteView tag,
              Bytes& out) {
  ossl::CipherCtxPtr c(EVP_CIPHER_CTX_new());
  if (!c) ossl::fail("EVP_CIPHER_CTX_new");
  out.assign(body.size(), 0);
  int len = 0;
  if (EVP_DecryptInit_ex(c.get(), EVP_aes_256_gcm(), nullptr, nullptr, nullptr) != 1 ||
      EVP_CIPHER_CTX_ctrl(c.get(), EVP_CTRL_GCM_SET_IVLEN, as_int(nonce.size()), nullptr) != 1 ||
      EVP_DecryptInit_ex(c.get(), nullptr, nullptr, key.data(), nonce.data()) != 1) {
    ossl::fail("gcm init");
  }
  if (!aad.empty() &&
      EVP_DecryptUpdate(c.get(), nullptr, &len, aad.data(), as_int(aad.size())) != 1) {
    return false;
  }
  if (!body.empty() &&
      EVP_DecryptUpdate(c.get(), out.data(), &len, body.data(), as_int(body.size())) != 1) {
    return false;
  }
  Tag t{};
  std::copy(tag.begin(), tag.end(), t.begin());
  if (EVP_CIPHER_CTX_ctrl(c.get(), EVP_CTRL_GCM_SET_TAG, as_int(t.size()), t.data()) != 1) {
    return false;
  }
  int fin = 0;
  if (EVP_DecryptFinal_ex(c.get(), out.data() + out.size(), &fin) != 1) {
    OPENSSL_cleanse(out.data(), out.size());
    out.clear();
    return false;
  }
  return true;
}

Key32 ecies_key(const Point& shared, const Compressed& ephemeral) {
  const codec::Field fields[] = {codec::Field::bytes(shared.x()), codec::Field::point(ephemeral)};
  return detail::framed_hash("EBAKE-ecies", fields).bytes;
}

}  // namespace

// ---- SymKey ----

SymKey SymKey::from_bytes(ByteView raw) {
  if (raw.size() != kSymKeySize) throw std::invalid_argument("K_dta must be 20 bytes");
  SymKey k;
  std::copy(raw.begin(), raw.end(), k.raw_.begin());
  const codec::Field fields[] = {codec::Field::bytes(k.raw_)};
  k.cipher_key_ = detail::framed_hash("EBAKE-symkey", fields).bytes;
  return k;
}

SymKey SymKey::generate(RandomSource& rng) {
  std::array<std::uint8_t, kSymKeySize> raw{};
  rng.fill(raw);
  SymKey k = from_bytes(raw);
  OPENSSL_cleanse(raw.data(), raw.size());
  return k;
}

SymKey::~SymKey() {
  OPENSSL_cleanse(raw_.data(), raw_.size());
  OPENSSL_cleanse(cipher_key_.data(), cipher_key_.size());
}

Bytes sym_encrypt(const SymKey& key, ByteView plaintext, RandomSource& rng) {
  detail::record(Op::kSym);
  Nonce nonce{};
  rng.fill(nonce);
  Tag tag{};
  Bytes body = gcm_seal(key.cipher_key(), nonce, {}, plaintext, tag);
  Bytes out;
  out.reserve(nonce.size() + body.size() + tag.size());
  out.insert(out.end(), nonce.begin(), nonce.end());
  out.insert(out.end(), body.begin(), body.end());
  out.insert(out.end(), tag.begin(), tag.end());
  return out;
}

Bytes sym_decrypt(const SymKey& key, ByteView ciphertext) {
  detail::record(Op::kSym);
  if (ciphertext.size() < kAeadNonceSize + kAeadTagSize) {
    throw AuthenticationError("symmetric ciphertext too short");
  }
  const auto nonce = ciphertext.first(kAeadNonceSize);
  const auto tag = ciphertext.last(kAeadTagSize);
  const auto body = ciphertext.subspan(kAeadNonceSize, ciphertext.size() - kAeadNonceSize - kAeadTagSize);
  Bytes out;
  if (!gcm_open(key.cipher_key(), nonce, {}, body, tag, out)) {
    throw AuthenticationError("symmetric authentication failed");
  }
  return out;
}

// ---- Hybrid ----

Bytes HybridCiphertext::serialize() const {
  Bytes out;
  out.reserve(kHybridOverhead + body.size());
  out.insert(out.end(), ephemeral.begin(), ephemeral.end());
  out.insert(out.end(), nonce.begin(), nonce.end());
  out.insert(out.end(), body.begin(), body.end());
  out.insert(out.end(), tag.begin(), tag.end());
  return out;
}

HybridCiphertext HybridCiphertext::parse(ByteView raw) {
  if (raw.size() < kHybridOverhead) throw DecryptionError("hybrid ciphertext too short");
  HybridCiphertext ct;
  std::copy_n(raw.begin(), 33, ct.ephemeral.begin());
  std::copy_n(raw.begin() + 33, kAeadNonceSize, ct.nonce.begin());
  const auto body = raw.subspan(33 + kAeadNonceSize, raw.size() - kHybridOverhead);
  ct.body.assign(body.begin(), body.end());
  std::copy_n(raw.end() - kAeadTagSize, kAeadTagSize, ct.tag.begin());
  return ct;
}

HybridCiphertext asym_encrypt(const Point& pub, ByteView plaintext, RandomSource& rng) {
  detail::record(Op::kAsym);
  if (pub.is_identity()) throw InvalidPoint("cannot encrypt to the identity");
  const Scalar e = random_scalar(rng);
  HybridCiphertext ct;
  ct.ephemeral = detail::mul_base(e).compressed();
  const Point shared = detail::mul(e, pub);
  Key32 key = ecies_key(shared, ct.ephemeral);
  rng.fill(ct.nonce);
  ct.body = gcm_seal(key, ct.nonce, ct.ephemeral, plaintext, ct.tag);
  OPENSSL_cleanse(key.data(), key.size());
  return ct;
}

Bytes asym_decrypt(const Scalar& priv, const HybridCiphertext& ct) {
  detail::record(Op::kAsym);
  Point r = Point::identity();
  try {
    r = Point::decompress(ct.ephemeral);
  } catch (const InvalidPoint&) {
    throw DecryptionError("ephemeral point is not on the curve");
  }
  const Point shared = detail::mul(priv, r);
  if (shared.is_identity()) throw DecryptionError("degenerate shared secret");
  Key32 key = ecies_key(shared, ct.ephemeral);
  Bytes out;
  const bool ok = gcm_open(key, ct.nonce, ct.ephemeral, ct.body, ct.tag, out);
  OPENSSL_cleanse(key.data(), key.size());
  if (!ok) throw DecryptionError("hybrid authentication failed");
  return out;
}

Bytes asym_decrypt(const Scalar& priv, ByteView serialized) {
  return asym_decrypt(priv, HybridCiphertext::parse(serialized));
}

}  // namespace ebake::crypto
