// Copyright 2026 The EBAKE Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>

#include "ebake/core/identity.hpp"
#include "ebake/crypto/cipher.hpp"
#include "ebake/crypto/hash.hpp"

namespace ebake::protocol {

enum class Role { kInitiator, kResponder };

struct SessionKey {
  crypto::Digest key;
  std::string topic;
  DeviceId peer;
  std::uint64_t established_at = 0;
  Role role = Role::kInitiator;

  /// First 8 hex characters of a hash of the key; safe to log.
  std::string fingerprint() const;
};

/// SK = hash(ID_init, N_init, T_1, ID_resp, N_resp, T_2, K_dta), initiator
/// first on both sides.
crypto::Digest derive_session_key(const DeviceId& id_init, ByteView n_init, std::uint64_t t1,
                                  const DeviceId& id_resp, ByteView n_resp, std::uint64_t t2,
                                  const crypto::SymKey& k_dta);

std::string key_fingerprint(const crypto::Digest& key);

}  // namespace ebake::protocol
