// Copyright 2026 The EBAKE Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "ebake/protocol/credentials.hpp"

#include <vector>

#include "ebake/protocol/messages.hpp"
#include "ebake/protocol/session.hpp"
#include "json.hpp"

namespace ebake::protocol {

using codec::Field;

crypto::Digest compute_dp1(const DeviceId& id, const crypto::Scalar& r_d, const crypto::SymKey& k_dta) {
  return crypto::hash(kTagDp1, {Field::id(id.bytes), crypto::to_field(r_d), Field::bytes(k_dta.raw())});
}

std::string device_inbox_topic(const crypto::Point& q_d) {
  const auto c = q_d.compressed();
  const auto d = crypto::detail::sha256(c);
  return "ebake/dev/" + to_hex(ByteView(d.bytes).first(16)) + "/inbox";
}

SecureElement::SecureElement(DeviceCredentials creds)
    : creds_(std::move(creds)), public_key_(crypto::detail::mul_base(creds_.r_d)) {}

Bytes SecureElement::seal_identity(crypto::RandomSource& rng) const {
  const Field fields[] = {Field::id(creds_.id.bytes), crypto::to_field(creds_.r_d)};
  return crypto::sym_encrypt(creds_.k_dta, codec::encode_fields(fields), rng);
}

Bytes SecureElement::mask(ByteView data) const { return crypto::xor_mask(creds_.dp1, data); }

crypto::Digest SecureElement::verifier(std::string_view tag, std::span<const Field> extra) const {
  std::vector<Field> fields;
  fields.reserve(extra.size() + 1);
  fields.push_back(crypto::to_field(creds_.dp1));
  fields.insert(fields.end(), extra.begin(), extra.end());
  return crypto::hash(tag, fields);
}

Bytes SecureElement::open(ByteView hybrid_ciphertext) const {
  return crypto::asym_decrypt(creds_.r_d, hybrid_ciphertext);
}

crypto::Digest SecureElement::session_key(const SessionInputs& in) const {
  return derive_session_key(in.id_init, in.n_init, in.t1, in.id_resp, in.n_resp, in.t2, creds_.k_dta);
}

bool SecureElement::credentials_consistent() const {
  const Field fields[] = {Field::id(creds_.id.bytes), crypto::to_field(creds_.r_d),
                          Field::bytes(creds_.k_dta.raw())};
  return crypto::detail::framed_hash(kTagDp1, fields) == creds_.dp1;
}

namespace {
constexpr int kCredentialSchema = 1;
constexpr std::string_view kCredentialKind = "ebake-device-credentials";
}  // namespace

std::string credentials_to_json(const DeviceCredentials& c) {
  nlohmann::json j{{"schema_version", kCredentialSchema},
                   {"kind", kCredentialKind},
                   {"id", c.id.hex()},
                   {"label", c.id.display()},
                   {"r_d", to_hex(c.r_d.bytes())},
                   {"k_dta", to_hex(c.k_dta.raw())},
                   {"dp1", c.dp1.hex()},
                   {"kdta_generation", c.kdta_generation},
                   {"warning", "software stand-in for a secure element; not tamper-resistant"}};
  return j.dump(2);
}

DeviceCredentials credentials_from_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.at("schema_version").get<int>() != kCredentialSchema || j.at("kind").get<std::string>() != kCredentialKind) {
      throw codec::ParseError("not a device credential file");
    }
    DeviceCredentials c{DeviceId::from_bytes(from_hex(j.at("id").get<std::string>())),
                        crypto::Scalar::from_bytes_checked(from_hex(j.at("r_d").get<std::string>())),
                        crypto::SymKey::from_bytes(from_hex(j.at("k_dta").get<std::string>())),
                        crypto::Digest::from_bytes(from_hex(j.at("dp1").get<std::string>())),
                        j.at("kdta_generation").get<std::uint32_t>()};
    if (!SecureElement(c).credentials_consistent()) throw codec::ParseError("credential DP_1 does not match its secrets");
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw codec::ParseError(std::string("credential file: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw codec::ParseError(std::string("credential file: ") + e.what());
  }
}

}  // namespace ebake::protocol
