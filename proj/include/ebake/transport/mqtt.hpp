// Copyright 2026 The EBAKE Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

// MQTT 3.1.1 over TCP: packet codec, a poll-driven client that implements
// PubSub, and a small loopback broker for tests and local demos. QoS 0 and 1
// only; no TLS, no retained messages, no persistent sessions.

#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "ebake/core/clock.hpp"
#include "ebake/transport/broker.hpp"

namespace ebake::transport::mqtt {

class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ProtocolError : public TransportError {
 public:
  using TransportError::TransportError;
};

enum class PacketType : std::uint8_t {
  kConnect = 1,
  kConnack = 2,
  kPublish = 3,
  kPuback = 4,
  kSubscribe = 8,
  kSuback = 9,
  kUnsubscribe = 10,
  kUnsuback = 11,
  kPingreq = 12,
  kPingresp = 13,
  kDisconnect = 14,
};

struct Packet {
  PacketType type = PacketType::kPingreq;
  std::uint8_t flags = 0;  // low nibble of the fixed header
  Bytes body;              // variable header and payload
};

inline constexpr std::size_t kMaxRemainingLength = 268'435'455;

Bytes encode_remaining_length(std::size_t n);
Bytes encode_packet(const Packet& p);
/// One packet from the front of `buf`, with the bytes it used, or nullopt if
/// `buf` holds only part of one. Throws ProtocolError on malformed framing.
std::optional<std::pair<Packet, std::size_t>> decode_packet(ByteView buf);

struct Connect {
  std::string client_id;
  std::uint16_t keepalive_s = 30;
  bool clean_session = true;
};
Packet make_connect(const Connect& c);
Connect parse_connect(const Packet& p);

enum class ConnackCode : std::uint8_t {
  kAccepted = 0,
  kBadProtocol = 1,
  kIdentifierRejected = 2,
  kServerUnavailable = 3,
};
Packet make_connack(ConnackCode code);
ConnackCode parse_connack(const Packet& p);

struct Publish {
  std::string topic;
  Bytes payload;
  std::uint8_t qos = 0;
  std::uint16_t packet_id = 0;  // qos > 0 only
  bool dup = false;
  bool retain = false;
};
Packet make_publish(const Publish& m);
Publish parse_publish(const Packet& p);

Packet make_puback(std::uint16_t packet_id);
std::uint16_t parse_packet_id(const Packet& p);

struct Subscribe {
  std::uint16_t packet_id = 0;
  std::vector<std::pair<std::string, std::uint8_t>> filters;  // (filter, requested qos)
};
Packet make_subscribe(const Subscribe& s);
Subscribe parse_subscribe(const Packet& p);

inline constexpr std::uint8_t kSubackFailure = 0x80;
Packet make_suback(std::uint16_t packet_id, const std::vector<std::uint8_t>& codes);
std::vector<std::uint8_t> parse_suback(const Packet& p, std::uint16_t expected_id);

Packet make_unsuback(std::uint16_t packet_id);
Packet make_empty(PacketType type);  // PINGREQ, PINGRESP, DISCONNECT

struct ClientOptions {
  std::string host = "127.0.0.1";
  std::uint16_t port = 1883;
  std::string client_id = "ebake";
  std::uint16_t keepalive_s = 30;
  std::uint8_t qos = 1;
  std::chrono::milliseconds connect_timeout{3000};
};

/// Blocking TCP client driven by poll(). Handlers run inside poll() on the
/// calling thread and may publish. Not thread-safe.
class Client final : public PubSub {
 public:
  /// Connects and completes the CONNECT/CONNACK exchange. Throws
  /// TransportError if the broker is unreachable or refuses.
  explicit Client(ClientOptions opts, const Clock* clock = nullptr);
  ~Client() override;
  Client(const Client&) = delete;
  Client& operator=(const Client&) = delete;

  void publish(const std::string& topic, Bytes payload) override;
  /// Sends SUBSCRIBE and waits for the SUBACK; publications that arrive in
  /// the meantime are dispatched.
  void subscribe(const std::string& pattern, Handler handler) override;

  /// Reads and dispatches for up to `timeout`. Returns the number of
  /// messages handed to handlers. Throws TransportError if the connection
  /// drops.
  std::size_t poll(std::chrono::milliseconds timeout);
  /// Sends DISCONNECT and closes. Safe to call twice.
  void disconnect();

  bool connected() const { return fd_ >= 0; }
  std::size_t unacked() const { return inflight_.size(); }
  const ClientOptions& options() const { return opts_; }

 private:
  void send(const Packet& p);
  std::optional<Packet> read_packet(std::chrono::milliseconds timeout);
  std::size_t handle(const Packet& p);
  void keepalive();
  std::uint16_t next_id();

  ClientOptions opts_;
  const Clock* clock_;
  int fd_ = -1;
  Bytes rx_;
  std::uint16_t last_id_ = 0;
  std::uint64_t seq_ = 0;
  std::vector<std::pair<std::string, Handler>> handlers_;
  std::map<std::uint16_t, Packet> inflight_;
  std::map<std::uint16_t, std::optional<std::vector<std::uint8_t>>> pending_subacks_;
  std::chrono::steady_clock::time_point last_sent_;
};

struct BrokerStats {
  std::uint64_t connections = 0;
  std::uint64_t publishes_in = 0;
  std::uint64_t publishes_out = 0;
  std::uint64_t protocol_errors = 0;
};

/// Loopback MQTT broker on a background thread. Routes publications to
/// matching subscriptions at min(publish qos, granted qos). Intended for
/// tests and single-host demos, not production.
class LoopbackBroker {
 public:
  /// Binds 127.0.0.1:`port`; 0 picks a free port.
  explicit LoopbackBroker(std::uint16_t port = 0);
  ~LoopbackBroker();
  LoopbackBroker(const LoopbackBroker&) = delete;
  LoopbackBroker& operator=(const LoopbackBroker&) = delete;

  std::uint16_t port() const { return port_; }
  void stop();
  BrokerStats stats() const;

 private:
  struct Impl;
  void loop();

  std::unique_ptr<Impl> impl_;
  std::uint16_t port_ = 0;
  int listen_fd_ = -1;
  int wake_fd_[2] = {-1, -1};
  std::atomic<bool> running_{true};
  std::thread thread_;
};

}  // namespace ebake::transport::mqtt
