// Copyright 2026 The EBAKE Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

// Dolev-Yao control of an in-process broker: every published message is
// recorded, and scripted rules may drop or rewrite it before delivery. The
// adversary can also inject arbitrary bytes and replay recorded messages.

#pragma once

#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ebake/das/das.hpp"
#include "ebake/protocol/authority.hpp"
#include "ebake/protocol/device.hpp"
#include "ebake/transport/broker.hpp"

namespace ebake::adversary {

enum class Direction { kObserved, kRewritten, kInjected };
std::string_view direction_name(Direction d);

struct Captured {
  Direction direction = Direction::kObserved;
  std::string topic;
  Bytes raw;
  std::uint64_t at = 0;
};

/// Append-only, byte-exact record of the wire.
class Transcript {
 public:
  void append(Captured c) { entries_.push_back(std::move(c)); }
  const std::vector<Captured>& entries() const { return entries_; }
  const Captured& at(std::size_t i) const { return entries_.at(i); }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

 private:
  std::vector<Captured> entries_;
};

/// Returns true if it changed the message.
using RewriteRule = std::function<bool(transport::Message&)>;
using DropRule = std::function<bool(const transport::Message&)>;

class CorruptionRefused : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// What physical capture of a device yields.
struct ExtractedCredentials {
  DeviceId id;
  std::string scheme;
  /// Full stored tuple for devices that keep secrets in plain memory.
  std::optional<das::DeviceState> das_state;
  /// Non-secret data readable outside the secure element.
  std::map<std::string, std::string> public_data;

  bool has_secrets() const { return das_state.has_value(); }
};

class Adversary {
 public:
  /// Attaches to `broker` as its interceptor; detaches on destruction.
  explicit Adversary(transport::Broker& broker);
  ~Adversary();
  Adversary(const Adversary&) = delete;
  Adversary& operator=(const Adversary&) = delete;

  const Transcript& transcript() const { return transcript_; }

  void inject(const std::string& topic, Bytes raw, std::uint64_t delay_ms = 0);
  void drop(DropRule rule);
  void rewrite(RewriteRule rule);
  void clear_rules();
  /// Re-sends transcript entry `index` to its original topic.
  void replay(std::size_t index, std::uint64_t delay_ms = 0);

  ExtractedCredentials corrupt_device(const das::Device& target);
  ExtractedCredentials corrupt_device(const protocol::Device& target);
  [[noreturn]] void corrupt_device(const protocol::TrustedAuthority& target);
  const std::map<DeviceId, ExtractedCredentials>& corrupted() const { return corrupted_; }

 private:
  transport::Verdict on_message(transport::Message& m);

  transport::Broker& broker_;
  Transcript transcript_;
  std::vector<DropRule> drops_;
  std::vector<RewriteRule> rewrites_;
  std::map<DeviceId, ExtractedCredentials> corrupted_;
};

}  // namespace ebake::adversary
