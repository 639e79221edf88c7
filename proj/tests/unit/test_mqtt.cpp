// Copyright 2026 The EBAKE Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "ebake/crypto/random.hpp"
#include "ebake/transport/mqtt.hpp"
#include "ebake/transport/nodes.hpp"

namespace ebake::transport::mqtt {
namespace {

using namespace std::chrono_literals;

Bytes b(std::initializer_list<int> v) {
  Bytes out;
  for (int x : v) out.push_back(static_cast<std::uint8_t>(x));
  return out;
}

Bytes str_bytes(std::string_view s) { return Bytes(s.begin(), s.end()); }

Bytes cat(Bytes a, const Bytes& c) {
  a.insert(a.end(), c.begin(), c.end());
  return a;
}

// Boundary table of the variable-length encoding.
TEST(MqttCodec, RemainingLengthTable) {
  const std::pair<std::size_t, Bytes> table[] = {
      {0, b({0x00})},
      {127, b({0x7F})},
      {128, b({0x80, 0x01})},
      {16383, b({0xFF, 0x7F})},
      {16384, b({0x80, 0x80, 0x01})},
      {2097151, b({0xFF, 0xFF, 0x7F})},
      {2097152, b({0x80, 0x80, 0x80, 0x01})},
      {268435455, b({0xFF, 0xFF, 0xFF, 0x7F})},
  };
  for (const auto& [n, enc] : table) EXPECT_EQ(encode_remaining_length(n), enc) << n;
  EXPECT_THROW(encode_remaining_length(kMaxRemainingLength + 1), std::invalid_argument);
}

TEST(MqttCodec, KnownPackets) {
  EXPECT_EQ(encode_packet(make_connect({"ebake", 30, true})),
            cat(b({0x10, 0x11, 0x00, 0x04, 'M', 'Q', 'T', 'T', 0x04, 0x02, 0x00, 0x1E, 0x00, 0x05}),
                str_bytes("ebake")));
  EXPECT_EQ(encode_packet(make_connack(ConnackCode::kAccepted)), b({0x20, 0x02, 0x00, 0x00}));
  EXPECT_EQ(encode_packet(make_publish({"a/b", str_bytes("hi"), 0, 0, false, false})),
            b({0x30, 0x07, 0x00, 0x03, 'a', '/', 'b', 'h', 'i'}));
  EXPECT_EQ(encode_packet(make_publish({"a/b", str_bytes("hi"), 1, 10, false, false})),
            b({0x32, 0x09, 0x00, 0x03, 'a', '/', 'b', 0x00, 0x0A, 'h', 'i'}));
  EXPECT_EQ(encode_packet(make_puback(10)), b({0x40, 0x02, 0x00, 0x0A}));
  EXPECT_EQ(encode_packet(make_subscribe({1, {{"a/b", 1}}})),
            b({0x82, 0x08, 0x00, 0x01, 0x00, 0x03, 'a', '/', 'b', 0x01}));
  EXPECT_EQ(encode_packet(make_suback(1, {0x01})), b({0x90, 0x03, 0x00, 0x01, 0x01}));
  EXPECT_EQ(encode_packet(make_empty(PacketType::kPingreq)), b({0xC0, 0x00}));
  EXPECT_EQ(encode_packet(make_empty(PacketType::kDisconnect)), b({0xE0, 0x00}));
}

TEST(MqttCodec, ParseRoundTrip) {
  const auto c = parse_connect(make_connect({"dev-1", 60, true}));
  EXPECT_EQ(c.client_id, "dev-1");
  EXPECT_EQ(c.keepalive_s, 60);
  EXPECT_TRUE(c.clean_session);

  const auto s = parse_subscribe(make_subscribe({7, {{"ebake/dev/+/inbox", 1}, {"#", 0}}}));
  EXPECT_EQ(s.packet_id, 7);
  ASSERT_EQ(s.filters.size(), 2u);
  EXPECT_EQ(s.filters[1].first, "#");
  EXPECT_EQ(parse_suback(make_suback(7, {1, kSubackFailure}), 7), (std::vector<std::uint8_t>{1, kSubackFailure}));
  EXPECT_THROW(parse_suback(make_suback(7, {1}), 8), ProtocolError);
  EXPECT_EQ(parse_connack(make_connack(ConnackCode::kIdentifierRejected)), ConnackCode::kIdentifierRejected);
}

TEST(MqttCodec, Malformed) {
  EXPECT_FALSE(decode_packet(Bytes{}).has_value());
  EXPECT_FALSE(decode_packet(b({0x30})).has_value());
  EXPECT_FALSE(decode_packet(b({0x30, 0x05, 0x00})).has_value());
  EXPECT_THROW(decode_packet(b({0x30, 0xFF, 0xFF, 0xFF, 0xFF, 0x01})), ProtocolError);
  EXPECT_THROW(decode_packet(b({0x00, 0x00})), ProtocolError);
  EXPECT_THROW(decode_packet(b({0xF0, 0x00})), ProtocolError);
  // Topic length runs past the body.
  EXPECT_THROW(parse_publish(Packet{PacketType::kPublish, 0, b({0x00, 0x09, 'a'})}), ProtocolError);
  EXPECT_THROW(parse_publish(Packet{PacketType::kPublish, 0x04, b({0x00, 0x01, 'a'})}), ProtocolError);
  EXPECT_THROW(parse_publish(Packet{PacketType::kPublish, 0x02, b({0x00, 0x01, 'a', 0x00, 0x00})}), ProtocolError);
  EXPECT_THROW(parse_subscribe(Packet{PacketType::kSubscribe, 0x00, b({0x00, 0x01, 0x00, 0x01, 'a', 0x00})}),
               ProtocolError);
  EXPECT_THROW(make_publish({"a", {}, 2, 1, false, false}), std::invalid_argument);
}

// Any split of a packet stream reassembles to the same packets.
TEST(MqttCodec, StreamReassemblyProperty) {
  crypto::DeterministicRandom rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Publish> sent;
    Bytes stream;
    const auto n = rng.uniform(1, 6);
    for (std::uint64_t i = 0; i < n; ++i) {
      Publish m{"t/" + std::to_string(rng.uniform(0, 999)), rng.bytes(rng.uniform(0, 400)),
                static_cast<std::uint8_t>(rng.uniform(0, 1)), 0, false, false};
      if (m.qos) m.packet_id = static_cast<std::uint16_t>(rng.uniform(1, 65535));
      stream = cat(stream, encode_packet(make_publish(m)));
      sent.push_back(std::move(m));
    }
    Bytes rx;
    std::vector<Publish> got;
    std::size_t pos = 0;
    while (pos < stream.size()) {
      const std::size_t chunk = std::min<std::size_t>(rng.uniform(1, 64), stream.size() - pos);
      rx.insert(rx.end(), stream.begin() + static_cast<std::ptrdiff_t>(pos),
                stream.begin() + static_cast<std::ptrdiff_t>(pos + chunk));
      pos += chunk;
      while (auto p = decode_packet(rx)) {
        rx.erase(rx.begin(), rx.begin() + static_cast<std::ptrdiff_t>(p->second));
        got.push_back(parse_publish(p->first));
      }
    }
    EXPECT_TRUE(rx.empty());
    ASSERT_EQ(got.size(), sent.size());
    for (std::size_t i = 0; i < sent.size(); ++i) {
      EXPECT_EQ(got[i].topic, sent[i].topic);
      EXPECT_EQ(got[i].payload, sent[i].payload);
      EXPECT_EQ(got[i].qos, sent[i].qos);
      EXPECT_EQ(got[i].packet_id, sent[i].packet_id);
    }
  }
}

ClientOptions opts(const LoopbackBroker& br, std::string id, std::uint8_t qos = 1) {
  ClientOptions o;
  o.port = br.port();
  o.client_id = std::move(id);
  o.qos = qos;
  return o;
}

/// Polls every client until `done` holds or two seconds pass.
template <class Pred>
bool pump(std::initializer_list<Client*> clients, Pred done) {
  const auto deadline = std::chrono::steady_clock::now() + 2s;
  while (!done()) {
    if (std::chrono::steady_clock::now() > deadline) return false;
    for (Client* c : clients) c->poll(5ms);
  }
  return true;
}

TEST(MqttLive, PublishSubscribe) {
  LoopbackBroker br;
  Client sub(opts(br, "sub"));
  Client pub(opts(br, "pub", 0));
  std::vector<Message> got;
  sub.subscribe("ebake/dev/+/inbox", [&](const Message& m) { got.push_back(m); });
  pub.publish("ebake/dev/abc/inbox", str_bytes("one"));
  pub.publish("ebake/ta/inbox", str_bytes("not routed"));
  pub.publish("ebake/dev/def/inbox", Bytes(70'000, 0x5A));
  ASSERT_TRUE(pump({&sub, &pub}, [&] { return got.size() == 2; }));
  EXPECT_EQ(got[0].topic, "ebake/dev/abc/inbox");
  EXPECT_EQ(got[0].payload, str_bytes("one"));
  EXPECT_EQ(got[1].payload.size(), 70'000u);
  EXPECT_LT(got[0].seq, got[1].seq);
  EXPECT_EQ(br.stats().publishes_in, 3u);
  EXPECT_EQ(br.stats().publishes_out, 2u);
}

TEST(MqttLive, QosOneIsAcknowledged) {
  LoopbackBroker br;
  Client c(opts(br, "c"));
  int n = 0;
  c.subscribe("x", [&](const Message&) { ++n; });
  for (int i = 0; i < 5; ++i) c.publish("x", Bytes{static_cast<std::uint8_t>(i)});
  EXPECT_EQ(c.unacked(), 5u);
  ASSERT_TRUE(pump({&c}, [&] { return n == 5 && c.unacked() == 0; }));
}

TEST(MqttLive, Errors) {
  std::uint16_t closed_port;
  {
    LoopbackBroker br;
    closed_port = br.port();
  }
  ClientOptions o;
  o.port = closed_port;
  o.connect_timeout = 500ms;
  EXPECT_THROW(Client{o}, TransportError);

  LoopbackBroker br;
  Client c(opts(br, "c"));
  EXPECT_THROW(c.publish("a/+", {}), std::invalid_argument);
  EXPECT_THROW(c.subscribe("a/#/b", [](const Message&) {}), std::invalid_argument);
  br.stop();
  EXPECT_THROW(
      {
        for (int i = 0; i < 100; ++i) c.poll(10ms);
      },
      TransportError);
  EXPECT_FALSE(c.connected());
}

TEST(MqttLive, DuplicateClientIdReplacesOlder) {
  LoopbackBroker br;
  Client first(opts(br, "same"));
  Client second(opts(br, "same"));
  EXPECT_THROW(
      {
        for (int i = 0; i < 100; ++i) first.poll(10ms);
      },
      TransportError);
  second.publish("t", {});
  EXPECT_NO_THROW(second.poll(10ms));
}

TEST(MqttLive, EbakeHandshakeOverSockets) {
  LoopbackBroker br;
  SystemClock clock;
  crypto::DeterministicRandom rng(5);
  protocol::TrustedAuthority ta({}, clock, rng);
  protocol::Device dx(protocol::SecureElement(ta.register_device(DeviceId::from_label("alpha"))), {}, clock, rng);
  protocol::Device dy(protocol::SecureElement(ta.register_device(DeviceId::from_label("beta"))), {}, clock, rng);

  Client ta_bus(opts(br, "ta"));
  Client x_bus(opts(br, "dx"));
  Client y_bus(opts(br, "dy"));
  TaNode ta_node(ta_bus, ta);
  DeviceNode x(x_bus, dx);
  DeviceNode y(y_bus, dy);
  ta_node.attach();
  x.attach();
  y.attach();

  for (int round = 0; round < 3; ++round) {
    const auto corr = x.initiate(dy.id(), dy.secure_element().public_key());
    ASSERT_TRUE(corr);
    ASSERT_TRUE(pump({&ta_bus, &x_bus, &y_bus},
                     [&] { return dx.session(corr.value()) && dy.session(corr.value()); }));
    EXPECT_EQ(dx.session(corr.value())->key, dy.session(corr.value())->key);
    EXPECT_EQ(dx.session(corr.value())->topic, dy.session(corr.value())->topic);
  }
  EXPECT_EQ(br.stats().protocol_errors, 0u);
}

TEST(MqttLive, DasHandshakeOverSockets) {
  LoopbackBroker br;
  SystemClock clock;
  crypto::DeterministicRandom rng(6);
  das::Authority authority(rng);
  das::Device dx(authority.register_device(DeviceId::from_label("alpha")), 5000, clock, rng);
  das::Device dy(authority.register_device(DeviceId::from_label("beta")), 5000, clock, rng);
  Client x_bus(opts(br, "dx"));
  Client y_bus(opts(br, "dy"));
  DasNode x(x_bus, dx);
  DasNode y(y_bus, dy);
  x.attach();
  y.attach();
  x.initiate(dy.id());
  ASSERT_TRUE(pump({&x_bus, &y_bus}, [&] { return !dx.sessions().empty() && !dy.sessions().empty(); }));
  EXPECT_EQ(dx.sessions()[0].key, dy.sessions()[0].key);
}

}  // namespace
}  // namespace ebake::transport::mqtt
