// Copyright 2026 The EBAKE Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "ebake/protocol/blocklist.hpp"

#include <algorithm>

namespace ebake::protocol {

void BlockList::expire(const std::string& peer, std::uint64_t now) {
  auto it = entries_.find(peer);
  if (it != entries_.end() && it->second.blocked_until && now >= *it->second.blocked_until) {
    entries_.erase(it);
  }
}

BlockState BlockList::record_failure(const std::string& peer, std::uint64_t now) {
  expire(peer, now);
  BlockState& st = entries_[peer];
  if (st.blocked_at(now)) return st;
  st.failures = std::min(st.failures + 1, threshold_);
  if (st.failures >= threshold_) st.blocked_until = now + duration_ms_;
  return st;
}

void BlockList::record_success(const std::string& peer) { entries_.erase(peer); }

bool BlockList::is_blocked(const std::string& peer, std::uint64_t now) {
  expire(peer, now);
  auto it = entries_.find(peer);
  return it != entries_.end() && it->second.blocked_at(now);
}

BlockState BlockList::state(const std::string& peer) const {
  auto it = entries_.find(peer);
  return it == entries_.end() ? BlockState{} : it->second;
}

}  // namespace ebake::protocol
