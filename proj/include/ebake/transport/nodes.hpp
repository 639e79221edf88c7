// Copyright 2026 The EBAKE Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

// Glue between the protocol state machines and a PubSub transport. Each node
// subscribes to its inbox, feeds inbound payloads to its state machine and
// publishes whatever comes back. Calls are serialized per node.

#pragma once

#include <functional>
#include <mutex>

#include "ebake/crypto/counters.hpp"
#include "ebake/das/das.hpp"
#include "ebake/protocol/authority.hpp"
#include "ebake/protocol/device.hpp"
#include "ebake/transport/broker.hpp"

namespace ebake::transport {

struct NodeStats {
  std::uint64_t handled = 0;
  std::uint64_t failures = 0;
  crypto::OpCounters ops;
  double compute_ms = 0.0;  // wall time spent inside the state machine
};

class TaNode {
 public:
  TaNode(PubSub& bus, protocol::TrustedAuthority& ta);
  void attach();

  NodeStats stats() const;
  std::function<void(const protocol::HandleResult&)> on_result;

 private:
  void on_message(const Message& m);

  PubSub& bus_;
  protocol::TrustedAuthority& ta_;
  mutable std::mutex mu_;
  NodeStats stats_;
};

class DeviceNode {
 public:
  DeviceNode(PubSub& bus, protocol::Device& device);
  void attach();

  /// Publishes Msg1 for `target`; returns the handshake correlation id.
  Outcome<codec::CorrelationId> initiate(const DeviceId& target, const crypto::Point& q_target);

  NodeStats stats() const;
  protocol::Device& device() { return device_; }
  /// Runs `f` with the node lock held.
  template <class F>
  auto with_device(F&& f) {
    std::lock_guard lock(mu_);
    return f(device_);
  }

  std::function<void(const protocol::SessionKey&)> on_established;
  std::function<void(const Failure&)> on_failure;

 private:
  void on_message(const Message& m);

  PubSub& bus_;
  protocol::Device& device_;
  mutable std::mutex mu_;
  NodeStats stats_;
};

class DasNode {
 public:
  DasNode(PubSub& bus, das::Device& device);
  void attach();

  codec::CorrelationId initiate(const DeviceId& peer);

  NodeStats stats() const;
  das::Device& device() { return device_; }

  std::function<void(const das::Established&)> on_established;
  std::function<void(const Failure&)> on_failure;

 private:
  void on_message(const Message& m);

  PubSub& bus_;
  das::Device& device_;
  mutable std::mutex mu_;
  NodeStats stats_;
};

}  // namespace ebake::transport
