// Copyright 2026 The EBAKE Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <queue>
#include <string>
#include <string_view>
#include <vector>

#include "ebake/core/clock.hpp"
#include "ebake/crypto/bytes.hpp"
#include "ebake/crypto/random.hpp"

namespace ebake::transport {

struct Message {
  std::string topic;
  Bytes payload;
  std::uint64_t published_at = 0;
  std::uint64_t seq = 0;
};

using Handler = std::function<void(const Message&)>;

/// Minimal publish/subscribe surface shared by the in-process broker and the
/// MQTT client.
class PubSub {
 public:
  virtual ~PubSub() = default;
  virtual void publish(const std::string& topic, Bytes payload) = 0;
  virtual void subscribe(const std::string& pattern, Handler handler) = 0;
};

/// MQTT topic filter matching: '+' matches one level, a trailing '#' matches
/// the remaining levels (including none).
bool topic_matches(std::string_view pattern, std::string_view topic);
bool valid_topic_filter(std::string_view pattern);

enum class DeliveryMode { kReliable, kLossy };

struct LossModel {
  double loss_probability = 0.0;
  std::uint64_t min_delay_ms = 5;
  std::uint64_t max_delay_ms = 30;
};

struct BrokerConfig {
  DeliveryMode mode = DeliveryMode::kReliable;
  LossModel loss;
};

struct Metrics {
  std::uint64_t published = 0;
  std::uint64_t delivered = 0;  // messages handed to the subscriber set
  std::uint64_t lost = 0;       // removed by the loss model
  std::uint64_t dropped = 0;    // removed by an interceptor
  std::uint64_t injected = 0;
  std::uint64_t deliveries = 0;  // per-subscriber handler invocations
  std::uint64_t unrouted = 0;    // delivered with no matching subscriber

  double pdr() const { return published == 0 ? 1.0 : static_cast<double>(delivered) / static_cast<double>(published); }
};

enum class Verdict { kDeliver, kDrop };
/// Sees every published message before it is queued; may rewrite it in place.
using Interceptor = std::function<Verdict(Message&)>;

struct Receipt {
  std::uint64_t seq = 0;
  bool queued = false;
  std::uint64_t deliver_at = 0;
};

/// In-process broker. Messages are queued and delivered by run()/step() in
/// (deliver_at, publish order) order; handlers may publish further messages.
/// publish/subscribe are thread-safe, delivery is driven by one thread.
class Broker final : public PubSub {
 public:
  Broker(Clock& clock, crypto::RandomSource& rng, BrokerConfig cfg = {});

  void publish(const std::string& topic, Bytes payload) override;
  void subscribe(const std::string& pattern, Handler handler) override;

  Receipt send(const std::string& topic, Bytes payload);
  /// Adversary path: bypasses the interceptor and the loss model.
  Receipt inject(const std::string& topic, Bytes payload, std::uint64_t delay_ms = 0);

  void set_interceptor(Interceptor i);
  void clear_interceptor();

  /// Delivers one message, advancing the clock to its delivery time.
  bool step();
  /// Delivers until the queue is empty or `max_messages` were delivered.
  std::size_t run(std::size_t max_messages = SIZE_MAX);
  std::size_t queued() const;

  Metrics metrics() const;
  void reset_metrics();
  const BrokerConfig& config() const { return cfg_; }
  Clock& clock() { return clock_; }

 private:
  struct Pending {
    std::uint64_t deliver_at;
    Message msg;
    bool operator>(const Pending& o) const {
      return deliver_at != o.deliver_at ? deliver_at > o.deliver_at : msg.seq > o.msg.seq;
    }
  };
  Receipt enqueue(Message msg, std::uint64_t delay_ms);

  Clock& clock_;
  crypto::RandomSource& rng_;
  BrokerConfig cfg_;
  mutable std::mutex mu_;
  std::vector<std::pair<std::string, Handler>> subs_;
  std::priority_queue<Pending, std::vector<Pending>, std::greater<>> queue_;
  Interceptor interceptor_;
  Metrics metrics_;
  std::uint64_t next_seq_ = 0;
};

}  // namespace ebake::transport
