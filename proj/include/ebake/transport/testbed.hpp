// Copyright 2026 The EBAKE Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

// Self-contained deployments over the in-process broker, used by the
// measurement harness, the adversary scenarios, the benchmarks and the CLI.

#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ebake/transport/broker.hpp"
#include "ebake/transport/nodes.hpp"
#include "json.hpp"

namespace ebake::transport {

enum class Scheme { kEbake, kDas };
std::string_view scheme_name(Scheme s);
std::optional<Scheme> parse_scheme(std::string_view s);

class EbakeTestbed {
 public:
  EbakeTestbed(Clock& clock, crypto::RandomSource& rng, BrokerConfig broker = {},
               protocol::ProtocolConfig cfg = {});

  /// Registers a device with the TA and attaches it to the broker.
  std::size_t add_device(const std::string& label);
  /// Attaches a device built from existing credentials.
  std::size_t add_device(const protocol::DeviceCredentials& creds);

  Outcome<codec::CorrelationId> initiate(std::size_t from, std::size_t to);

  Broker& broker() { return broker_; }
  protocol::TrustedAuthority& ta() { return *ta_; }
  TaNode& ta_node() { return *ta_node_; }
  DeviceNode& node(std::size_t i) { return *nodes_.at(i); }
  protocol::Device& device(std::size_t i) { return *devices_.at(i); }
  std::size_t size() const { return devices_.size(); }
  const protocol::ProtocolConfig& config() const { return cfg_; }

 private:
  Clock& clock_;
  crypto::RandomSource& rng_;
  protocol::ProtocolConfig cfg_;
  Broker broker_;
  std::unique_ptr<protocol::TrustedAuthority> ta_;
  std::unique_ptr<TaNode> ta_node_;
  std::vector<std::unique_ptr<protocol::Device>> devices_;
  std::vector<std::unique_ptr<DeviceNode>> nodes_;
};

class DasTestbed {
 public:
  DasTestbed(Clock& clock, crypto::RandomSource& rng, BrokerConfig broker = {}, std::uint64_t window_ms = 5000);

  std::size_t add_device(const std::string& label);
  codec::CorrelationId initiate(std::size_t from, std::size_t to);

  Broker& broker() { return broker_; }
  das::Authority& authority() { return authority_; }
  DasNode& node(std::size_t i) { return *nodes_.at(i); }
  das::Device& device(std::size_t i) { return *devices_.at(i); }
  std::size_t size() const { return devices_.size(); }
  std::uint64_t window() const { return window_; }

 private:
  Clock& clock_;
  crypto::RandomSource& rng_;
  std::uint64_t window_;
  Broker broker_;
  das::Authority authority_;
  std::vector<std::unique_ptr<das::Device>> devices_;
  std::vector<std::unique_ptr<DasNode>> nodes_;
};

struct MeasureOptions {
  Scheme scheme = Scheme::kEbake;
  std::size_t runs = 100;
  /// Handshakes started together before the broker is drained.
  std::size_t concurrency = 1;
  BrokerConfig broker;
  protocol::ProtocolConfig protocol;
  std::uint64_t seed = 1;
};

struct HandshakeRecord {
  bool completed = false;        // both sides hold a session key
  bool keys_match = false;
  bool initiator_ok = false;
  bool responder_agrees = false;  // responder derived the initiator's key
  double rtt_ms = 0.0;           // initiate -> initiator accepts, simulated delay plus compute
  std::optional<FailureReason> failure;
  std::string topic;
};

struct MeasureReport {
  Scheme scheme = Scheme::kEbake;
  std::vector<HandshakeRecord> runs;
  Metrics metrics;
  std::size_t completed = 0;
  double mean_rtt_ms = 0.0;
  double min_rtt_ms = 0.0;
  double max_rtt_ms = 0.0;
  double elapsed_ms = 0.0;
  double throughput_per_min = 0.0;  // delivered messages per minute

  nlohmann::json to_json() const;
};

/// Runs `runs` handshakes between two devices over a fresh in-process broker
/// driven by a manual clock, so network delay is simulated and compute time
/// is measured.
MeasureReport measure_handshake(const MeasureOptions& opts);

}  // namespace ebake::transport
