// Copyright 2026 The EBAKE Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "ebake/transport/mqtt.hpp"

namespace ebake::transport::mqtt {

namespace {

class Reader {
 public:
  explicit Reader(ByteView b) : b_(b) {}

  std::uint8_t u8() {
    need(1);
    return b_[pos_++];
  }
  std::uint16_t u16() {
    need(2);
    const std::uint16_t v = static_cast<std::uint16_t>(b_[pos_] << 8 | b_[pos_ + 1]);
    pos_ += 2;
    return v;
  }
  std::string str() {
    const std::uint16_t n = u16();
    need(n);
    std::string s(reinterpret_cast<const char*>(b_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  Bytes rest() {
    Bytes out(b_.begin() + static_cast<std::ptrdiff_t>(pos_), b_.end());
    pos_ = b_.size();
    return out;
  }
  bool done() const { return pos_ == b_.size(); }

 private:
  void need(std::size_t n) const {
    if (b_.size() - pos_ < n) throw ProtocolError("truncated MQTT packet");
  }
  ByteView b_;
  std::size_t pos_ = 0;
};

void put_u16(Bytes& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

void put_str(Bytes& out, std::string_view s) {
  if (s.size() > 0xFFFF) throw std::invalid_argument("MQTT string longer than 65535 bytes");
  put_u16(out, static_cast<std::uint16_t>(s.size()));
  out.insert(out.end(), s.begin(), s.end());
}

void expect(const Packet& p, PacketType t, std::uint8_t flags) {
  if (p.type != t) throw ProtocolError("unexpected MQTT packet type");
  if (p.flags != flags) throw ProtocolError("reserved MQTT header flags set");
}

}  // namespace

Bytes encode_remaining_length(std::size_t n) {
  if (n > kMaxRemainingLength) throw std::invalid_argument("MQTT remaining length too large");
  Bytes out;
  do {
    std::uint8_t b = n % 128;
    n /= 128;
    if (n > 0) b |= 0x80;
    out.push_back(b);
  } while (n > 0);
  return out;
}

Bytes encode_packet(const Packet& p) {
  Bytes out;
  out.push_back(static_cast<std::uint8_t>(static_cast<std::uint8_t>(p.type) << 4 | (p.flags & 0x0F)));
  const Bytes len = encode_remaining_length(p.body.size());
  out.insert(out.end(), len.begin(), len.end());
  out.insert(out.end(), p.body.begin(), p.body.end());
  return out;
}

std::optional<std::pair<Packet, std::size_t>> decode_packet(ByteView buf) {
  if (buf.empty()) return std::nullopt;
  const std::uint8_t type = buf[0] >> 4;
  if (type == 0 || type == 15) throw ProtocolError("reserved MQTT packet type");
  std::size_t len = 0;
  std::size_t mult = 1;
  std::size_t i = 1;
  for (;; ++i) {
    if (i > 4) throw ProtocolError("MQTT remaining length longer than 4 bytes");
    if (i >= buf.size()) return std::nullopt;
    len += (buf[i] & 0x7F) * mult;
    if ((buf[i] & 0x80) == 0) break;
    mult *= 128;
  }
  const std::size_t header = i + 1;
  if (buf.size() - header < len) return std::nullopt;
  Packet p{static_cast<PacketType>(type), static_cast<std::uint8_t>(buf[0] & 0x0F),
           Bytes(buf.begin() + static_cast<std::ptrdiff_t>(header),
                 buf.begin() + static_cast<std::ptrdiff_t>(header + len))};
  return std::make_pair(std::move(p), header + len);
}

Packet make_connect(const Connect& c) {
  Packet p{PacketType::kConnect, 0, {}};
  put_str(p.body, "MQTT");
  p.body.push_back(4);  // protocol level 3.1.1
  p.body.push_back(c.clean_session ? 0x02 : 0x00);
  put_u16(p.body, c.keepalive_s);
  put_str(p.body, c.client_id);
  return p;
}

Connect parse_connect(const Packet& p) {
  expect(p, PacketType::kConnect, 0);
  Reader r(p.body);
  if (r.str() != "MQTT") throw ProtocolError("unsupported MQTT protocol name");
  if (r.u8() != 4) throw ProtocolError("unsupported MQTT protocol level");
  const std::uint8_t flags = r.u8();
  if (flags & 0x01) throw ProtocolError("reserved CONNECT flag set");
  if (flags & 0xFC) throw ProtocolError("will, username and password are not supported");
  Connect c;
  c.clean_session = flags & 0x02;
  c.keepalive_s = r.u16();
  c.client_id = r.str();
  if (!r.done()) throw ProtocolError("trailing bytes in CONNECT");
  return c;
}

Packet make_connack(ConnackCode code) {
  return Packet{PacketType::kConnack, 0, Bytes{0x00, static_cast<std::uint8_t>(code)}};
}

ConnackCode parse_connack(const Packet& p) {
  expect(p, PacketType::kConnack, 0);
  Reader r(p.body);
  r.u8();  // session present
  const auto code = r.u8();
  if (!r.done()) throw ProtocolError("trailing bytes in CONNACK");
  return static_cast<ConnackCode>(code);
}

Packet make_publish(const Publish& m) {
  if (m.qos > 1) throw std::invalid_argument("QoS 2 is not supported");
  Packet p{PacketType::kPublish,
           static_cast<std::uint8_t>((m.dup ? 0x08 : 0) | m.qos << 1 | (m.retain ? 0x01 : 0)), {}};
  put_str(p.body, m.topic);
  if (m.qos > 0) put_u16(p.body, m.packet_id);
  p.body.insert(p.body.end(), m.payload.begin(), m.payload.end());
  return p;
}

Publish parse_publish(const Packet& p) {
  if (p.type != PacketType::kPublish) throw ProtocolError("unexpected MQTT packet type");
  Publish m;
  m.qos = (p.flags >> 1) & 0x03;
  if (m.qos > 1) throw ProtocolError("QoS 2 is not supported");
  m.dup = p.flags & 0x08;
  m.retain = p.flags & 0x01;
  Reader r(p.body);
  m.topic = r.str();
  if (m.qos > 0) {
    m.packet_id = r.u16();
    if (m.packet_id == 0) throw ProtocolError("packet identifier 0");
  }
  m.payload = r.rest();
  return m;
}

Packet make_puback(std::uint16_t packet_id) {
  Packet p{PacketType::kPuback, 0, {}};
  put_u16(p.body, packet_id);
  return p;
}

std::uint16_t parse_packet_id(const Packet& p) {
  Reader r(p.body);
  const auto id = r.u16();
  if (!r.done()) throw ProtocolError("trailing bytes after packet identifier");
  return id;
}

Packet make_subscribe(const Subscribe& s) {
  Packet p{PacketType::kSubscribe, 0x02, {}};
  put_u16(p.body, s.packet_id);
  for (const auto& [filter, qos] : s.filters) {
    put_str(p.body, filter);
    p.body.push_back(qos);
  }
  return p;
}

Subscribe parse_subscribe(const Packet& p) {
  expect(p, PacketType::kSubscribe, 0x02);
  Reader r(p.body);
  Subscribe s;
  s.packet_id = r.u16();
  while (!r.done()) {
    std::string filter = r.str();
    const std::uint8_t qos = r.u8();
    if (qos > 2) throw ProtocolError("invalid requested QoS");
    s.filters.emplace_back(std::move(filter), qos);
  }
  if (s.filters.empty()) throw ProtocolError("SUBSCRIBE without filters");
  return s;
}

Packet make_suback(std::uint16_t packet_id, const std::vector<std::uint8_t>& codes) {
  Packet p{PacketType::kSuback, 0, {}};
  put_u16(p.body, packet_id);
  p.body.insert(p.body.end(), codes.begin(), codes.end());
  return p;
}

std::vector<std::uint8_t> parse_suback(const Packet& p, std::uint16_t expected_id) {
  expect(p, PacketType::kSuback, 0);
  Reader r(p.body);
  if (r.u16() != expected_id) throw ProtocolError("SUBACK for another packet identifier");
  return r.rest();
}

Packet make_unsuback(std::uint16_t packet_id) {
  Packet p{PacketType::kUnsuback, 0, {}};
  put_u16(p.body, packet_id);
  return p;
}

Packet make_empty(PacketType type) { return Packet{type, 0, {}}; }

}  // namespace ebake::transport::mqtt
