// Copyright 2026 The EBAKE Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "ebake/transport/nodes.hpp"

#include <chrono>

namespace ebake::transport {

namespace {

class Timed {
 public:
  explicit Timed(NodeStats& s) : stats_(s), scope_(s.ops), start_(std::chrono::steady_clock::now()) {}
  ~Timed() {
    stats_.compute_ms += std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  NodeStats& stats_;
  crypto::CountingScope scope_;
  std::chrono::steady_clock::time_point start_;
};

template <class Out>
void publish_all(PubSub& bus, const std::vector<Out>& out) {
  for (const auto& o : out) bus.publish(o.topic, codec::encode_envelope(o.envelope));
}

}  // namespace

TaNode::TaNode(PubSub& bus, protocol::TrustedAuthority& ta) : bus_(bus), ta_(ta) {}

void TaNode::attach() {
  bus_.subscribe(std::string(protocol::kTaInboxTopic), [this](const Message& m) { on_message(m); });
}

void TaNode::on_message(const Message& m) {
  protocol::HandleResult r;
  {
    std::lock_guard lock(mu_);
    {
      Timed t(stats_);
      r = ta_.handle(m.payload);
    }
    ++stats_.handled;
    if (r.failure) ++stats_.failures;
  }
  publish_all(bus_, r.outbound);
  if (on_result) on_result(r);
}

NodeStats TaNode::stats() const {
  std::lock_guard lock(mu_);
  return stats_;
}

DeviceNode::DeviceNode(PubSub& bus, protocol::Device& device) : bus_(bus), device_(device) {}

void DeviceNode::attach() {
  bus_.subscribe(device_.inbox_topic(), [this](const Message& m) { on_message(m); });
}

Outcome<codec::CorrelationId> DeviceNode::initiate(const DeviceId& target, const crypto::Point& q_target) {
  Outcome<protocol::Outbound> out = Failure{FailureReason::kMalformed, ""};
  {
    std::lock_guard lock(mu_);
    Timed t(stats_);
    out = device_.initiate(target, q_target);
  }
  if (!out) {
    if (on_failure) on_failure(out.failure());
    return out.failure();
  }
  bus_.publish(out.value().topic, codec::encode_envelope(out.value().envelope));
  return out.value().envelope.correlation;
}

void DeviceNode::on_message(const Message& m) {
  protocol::HandleResult r;
  {
    std::lock_guard lock(mu_);
    {
      Timed t(stats_);
      r = device_.handle(m.payload);
    }
    ++stats_.handled;
    if (r.failure) ++stats_.failures;
  }
  publish_all(bus_, r.outbound);
  if (r.established && on_established) on_established(*r.established);
  if (r.failure && on_failure) on_failure(*r.failure);
}

NodeStats DeviceNode::stats() const {
  std::lock_guard lock(mu_);
  return stats_;
}

DasNode::DasNode(PubSub& bus, das::Device& device) : bus_(bus), device_(device) {}

void DasNode::attach() {
  bus_.subscribe(device_.topic(), [this](const Message& m) { on_message(m); });
}

codec::CorrelationId DasNode::initiate(const DeviceId& peer) {
  das::Outgoing out;
  {
    std::lock_guard lock(mu_);
    Timed t(stats_);
    out = device_.initiate(peer);
  }
  bus_.publish(out.topic, codec::encode_envelope(out.envelope));
  return out.envelope.correlation;
}

void DasNode::on_message(const Message& m) {
  das::HandleResult r;
  {
    std::lock_guard lock(mu_);
    {
      Timed t(stats_);
      r = device_.handle(m.payload);
    }
    ++stats_.handled;
    if (r.failure) ++stats_.failures;
  }
  publish_all(bus_, r.outbound);
  if (r.established && on_established) on_established(*r.established);
  if (r.failure && on_failure) on_failure(*r.failure);
}

NodeStats DasNode::stats() const {
  std::lock_guard lock(mu_);
  return stats_;
}

}  // namespace ebake::transport
