// Copyright 2026 The EBAKE Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

namespace ebake::protocol {

struct ProtocolConfig {
  std::uint64_t freshness_window_ms = 5'000;
  std::uint64_t block_duration_ms = 86'400'000;
  std::uint32_t failure_threshold = 3;
  /// Rejects an unmodified Msg1 replayed inside the freshness window. Off by
  /// default: acceptance rests on timestamps alone.
  bool replay_cache = false;
  /// Initiator and responder give up after this long. 0 means 4 x window.
  std::uint64_t timeout_ms = 0;

  std::uint64_t pending_ttl_ms() const { return 2 * freshness_window_ms; }
  std::uint64_t handshake_timeout_ms() const { return timeout_ms ? timeout_ms : 4 * freshness_window_ms; }
};

}  // namespace ebake::protocol
