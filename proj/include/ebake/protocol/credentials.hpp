// Copyright 2026 The EBAKE Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "ebake/codec/fields.hpp"
#include "ebake/core/identity.hpp"
#include "ebake/crypto/cipher.hpp"
#include "ebake/crypto/ec.hpp"
#include "ebake/crypto/hash.hpp"

namespace ebake::protocol {

/// Material provisioned into a device's secure element.
struct DeviceCredentials {
  DeviceId id;
  crypto::Scalar r_d;
  crypto::SymKey k_dta;
  crypto::Digest dp1;
  std::uint32_t kdta_generation = 0;
};

/// Device credential file: JSON with hex fields. It stands in for secure
/// element provisioning and is not tamper-resistant; keep it mode 0600.
std::string credentials_to_json(const DeviceCredentials& c);
/// Throws codec::ParseError on malformed input or if DP_1 does not match.
DeviceCredentials credentials_from_json(std::string_view text);

/// The TA's view of a device. Never holds r_d.
struct TADeviceRecord {
  DeviceId id;
  crypto::Digest dp1;
  crypto::Point q_d;
  std::uint32_t kdta_generation = 0;
};

/// DP_1 = hash(ID, r_d, K_dta). Counted like any protocol hash.
crypto::Digest compute_dp1(const DeviceId& id, const crypto::Scalar& r_d, const crypto::SymKey& k_dta);

/// Inbox topic derived from the public key so topic names carry no identity.
std::string device_inbox_topic(const crypto::Point& q_d);
inline constexpr std::string_view kTaInboxTopic = "ebake/ta/inbox";
inline constexpr std::string_view kSessionTopicPrefix = "ebake/session/";

struct SessionInputs {
  DeviceId id_init;
  Bytes n_init;
  std::uint64_t t1 = 0;
  DeviceId id_resp;
  Bytes n_resp;
  std::uint64_t t2 = 0;
};

/// Software stand-in for the secure element. Protocol code reaches r_d and
/// K_dta only through these operations.
class SecureElement {
 public:
  explicit SecureElement(DeviceCredentials creds);

  const DeviceId& id() const { return creds_.id; }
  const crypto::Point& public_key() const { return public_key_; }
  std::uint32_t kdta_generation() const { return creds_.kdta_generation; }
  std::string inbox_topic() const { return device_inbox_topic(public_key_); }

  /// W = sym_encrypt(K_dta, [ID, r_d]).
  Bytes seal_identity(crypto::RandomSource& rng) const;
  /// expand_mask(DP_1, |data|) xor data.
  Bytes mask(ByteView data) const;
  /// hash(tag, [DP_1, extra...]).
  crypto::Digest verifier(std::string_view tag, std::span<const codec::Field> extra) const;
  Bytes open(ByteView hybrid_ciphertext) const;
  crypto::Digest session_key(const SessionInputs& in) const;
  bool credentials_consistent() const;

  /// Copy of the provisioned material for persistence by the owning tool.
  /// Not used by protocol code.
  const DeviceCredentials& export_for_storage() const { return creds_; }

 private:
  DeviceCredentials creds_;
  crypto::Point public_key_;
};

}  // namespace ebake::protocol
