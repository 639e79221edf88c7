// Copyright 2026 The EBAKE Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "ebake/protocol/session.hpp"

#include "ebake/protocol/messages.hpp"

namespace ebake::protocol {

using codec::Field;

crypto::Digest derive_session_key(const DeviceId& id_init, ByteView n_init, std::uint64_t t1,
                                  const DeviceId& id_resp, ByteView n_resp, std::uint64_t t2,
                                  const crypto::SymKey& k_dta) {
  return crypto::hash(kTagSk, {Field::id(id_init.bytes), Field::bytes(n_init), Field::timestamp(t1),
                               Field::id(id_resp.bytes), Field::bytes(n_resp), Field::timestamp(t2),
                               Field::bytes(k_dta.raw())});
}

std::string key_fingerprint(const crypto::Digest& key) {
  const Field f[] = {crypto::to_field(key)};
  return crypto::detail::framed_hash("EBAKE-fingerprint", f).hex().substr(0, 8);
}

std::string SessionKey::fingerprint() const { return key_fingerprint(key); }

}  // namespace ebake::protocol
