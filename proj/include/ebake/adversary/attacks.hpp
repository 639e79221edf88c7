// Copyright 2026 The EBAKE Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ebake/adversary/channel.hpp"
#include "ebake/transport/testbed.hpp"
#include "json.hpp"

namespace ebake::adversary {

using transport::Scheme;

enum class AttackKind { kTrace, kImpersonate, kMitm, kDos };
std::string_view attack_name(AttackKind k);
std::optional<AttackKind> parse_attack(std::string_view name);

struct AttackReport {
  std::string attack;
  Scheme scheme = Scheme::kEbake;
  /// True only when the attack's goal was machine-checked as reached.
  bool success = false;
  nlohmann::json evidence = nlohmann::json::object();
  std::vector<std::string> steps;

  std::string outcome() const { return success ? "success" : "failure"; }
  nlohmann::json to_json() const;
};

struct AttackOptions {
  std::uint64_t seed = 1;
  std::size_t flood_count = 100;
  std::size_t sessions = 3;  // honest handshakes captured for tracing
  protocol::ProtocolConfig protocol;
};

/// Every place a registered identity shows up in the transcript: raw id
/// bytes, their hex form or the printable label, in payloads or topics.
struct IdentityHit {
  std::size_t entry = 0;
  DeviceId id;
  std::string form;  // "raw", "hex" or "label"
  bool in_topic = false;
};
std::vector<IdentityHit> scan_identities(const Transcript& t, const std::vector<DeviceId>& ids);

/// Ciphertext fields carried by the transcript (W, Z, Z_y for EBAKE).
struct CiphertextField {
  std::size_t entry = 0;
  codec::MsgType type{};
  std::string name;
  Bytes body;
};
std::vector<CiphertextField> ciphertext_fields(const Transcript& t);

/// Keys an insider TA could derive for handshake `corr` from everything it
/// holds or sees: K_dta, the registry, W (hence r_dx), Z_y opened with r_dx
/// (hence N_y), tags, timestamps and the topic. N_x is only ever encrypted to
/// D_y, so each candidate substitutes a TA-visible value for it.
struct RogueTaAttempt {
  bool recovered_n_y = false;
  std::vector<std::pair<std::string, crypto::Digest>> candidates;
};
RogueTaAttempt rogue_ta_candidates(const protocol::TrustedAuthority& ta, const Transcript& t,
                                   const codec::CorrelationId& corr);

AttackReport attack_trace_identity(Scheme scheme, const Transcript& t, const std::vector<DeviceId>& registered);

AttackReport attack_trace(Scheme scheme, const AttackOptions& opts);
AttackReport attack_impersonate(Scheme scheme, const AttackOptions& opts);
AttackReport attack_mitm(Scheme scheme, const AttackOptions& opts);
AttackReport attack_dos_flood(Scheme scheme, const AttackOptions& opts);

AttackReport run_attack(AttackKind kind, Scheme scheme, const AttackOptions& opts);

}  // namespace ebake::adversary
