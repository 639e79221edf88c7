// Copyright 2026 The EBAKE Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

namespace ebake::protocol {

struct BlockState {
  std::uint32_t failures = 0;
  std::optional<std::uint64_t> blocked_until;

  bool blocked_at(std::uint64_t now) const { return blocked_until && now < *blocked_until; }
};

/// Consecutive-failure counter per peer key. The key is an opaque string:
/// "id:<hex>" for identified devices, "hint:<sender>" for unauthenticated
/// senders and "ta" for the trusted authority.
class BlockList {
 public:
  BlockList(std::uint32_t threshold, std::uint64_t duration_ms)
      : threshold_(threshold), duration_ms_(duration_ms) {}

  BlockState record_failure(const std::string& peer, std::uint64_t now);
  void record_success(const std::string& peer);
  bool is_blocked(const std::string& peer, std::uint64_t now);
  BlockState state(const std::string& peer) const;
  std::size_t size() const { return entries_.size(); }
  const std::map<std::string, BlockState>& entries() const { return entries_; }
  void restore(const std::string& peer, BlockState st) { entries_[peer] = st; }

 private:
  void expire(const std::string& peer, std::uint64_t now);

  std::uint32_t threshold_;
  std::uint64_t duration_ms_;
  std::map<std::string, BlockState> entries_;
};

inline const std::string kTaPeer = "ta";

}  // namespace ebake::protocol
