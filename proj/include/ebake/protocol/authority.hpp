// Copyright 2026 The EBAKE Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "ebake/codec/envelope.hpp"
#include "ebake/core/clock.hpp"
#include "ebake/core/outcome.hpp"
#include "ebake/crypto/random.hpp"
#include "ebake/protocol/blocklist.hpp"
#include "ebake/protocol/config.hpp"
#include "ebake/protocol/credentials.hpp"
#include "ebake/protocol/messages.hpp"
#include "ebake/protocol/session.hpp"

namespace ebake::protocol {

class RegistrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PublicDeviceInfo {
  DeviceId id;
  crypto::Point q_d;
  std::string inbox_topic;
};

struct TaPending {
  DeviceId id_x;
  crypto::Digest dp1_x;
  DeviceId id_y;
  std::uint64_t t2 = 0;
  std::uint64_t created_at = 0;
};

/// Result of feeding one raw inbound message to a node.
struct HandleResult {
  std::vector<Outbound> outbound;
  std::optional<Failure> failure;
  std::optional<SessionKey> established;
};

/// Trusted authority: registry, K_dta generations, block list and pending
/// sessions. Each public call is atomic with respect to that state.
class TrustedAuthority {
 public:
  TrustedAuthority(ProtocolConfig cfg, const Clock& clock, crypto::RandomSource& rng);

  DeviceCredentials register_device(const DeviceId& id);
  void rotate_kdta();
  std::uint32_t kdta_generation() const;

  std::size_t registry_size() const;
  std::optional<TADeviceRecord> lookup(const DeviceId& id) const;
  std::optional<PublicDeviceInfo> public_info(const DeviceId& id) const;
  std::vector<PublicDeviceInfo> directory() const;

  /// Step 2. Counters: 1 sym, 3 hash, 1 xor.
  Outcome<Outbound> handle_msg1(const Msg1& m, const codec::CorrelationId& corr,
                                const std::string& sender_hint);
  /// Step 4. Returns Msg4 for the initiator and a topic notice for the
  /// responder. Counters: 2 hash.
  Outcome<std::vector<Outbound>> handle_msg3(const Msg3& m, const codec::CorrelationId& corr,
                                             const std::string& sender_hint);
  HandleResult handle(ByteView raw);

  bool is_blocked(const std::string& peer) const;
  BlockState block_state(const std::string& peer) const;
  std::size_t pending_count() const;
  std::optional<TaPending> pending(const codec::CorrelationId& corr) const;
  void expire_pending();
  std::vector<Failure> failure_log() const;

  /// K_dta of a generation. Exposed for persistence and for the rogue-TA
  /// analysis, which assumes an insider that knows everything the TA holds.
  crypto::SymKey kdta(std::uint32_t generation) const;

  std::string to_json() const;
  static std::unique_ptr<TrustedAuthority> from_json(std::string_view json, ProtocolConfig cfg,
                                                     const Clock& clock, crypto::RandomSource& rng);
  /// Writes via a temporary file and rename.
  void save(const std::filesystem::path& path) const;
  static std::unique_ptr<TrustedAuthority> load(const std::filesystem::path& path,
                                                ProtocolConfig cfg, const Clock& clock,
                                                crypto::RandomSource& rng);

  const ProtocolConfig& config() const { return cfg_; }
  const std::string& inbox_topic() const { return inbox_; }

 private:
  TrustedAuthority(ProtocolConfig cfg, const Clock& clock, crypto::RandomSource& rng,
                   std::vector<crypto::SymKey> generations);
  Failure fail(const std::string& key, FailureReason reason, std::string detail);
  Failure refuse_blocked(const std::string& key);
  std::optional<PublicDeviceInfo> public_info_locked(const DeviceId& id) const;

  ProtocolConfig cfg_;
  const Clock& clock_;
  crypto::RandomSource& rng_;
  std::string inbox_{kTaInboxTopic};

  mutable std::mutex mu_;
  std::vector<crypto::SymKey> generations_;
  std::map<DeviceId, TADeviceRecord> registry_;
  std::map<crypto::Compressed, DeviceId> by_point_;
  BlockList blocks_;
  std::map<codec::CorrelationId, TaPending> pending_;
  std::map<std::pair<std::string, std::uint64_t>, std::uint64_t> seen_;  // (P_dx hex, T_1) -> seen at
  std::vector<Failure> failures_;
};

std::string peer_key(const DeviceId& id);
std::string hint_key(std::string_view sender_hint);

}  // namespace ebake::protocol
