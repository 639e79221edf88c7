// Copyright 2026 The EBAKE Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "ebake/transport/mqtt.hpp"

namespace ebake::transport::mqtt {

namespace {

using SteadyClock = std::chrono::steady_clock;
constexpr auto kRetransmitAfter = std::chrono::seconds(5);

std::string errno_text(const std::string& what) { return what + ": " + std::strerror(errno); }

int connect_socket(const ClientOptions& o) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  const std::string port = std::to_string(o.port);
  if (const int rc = ::getaddrinfo(o.host.c_str(), port.c_str(), &hints, &res); rc != 0) {
    throw TransportError("resolve " + o.host + ": " + ::gai_strerror(rc));
  }
  std::string last = "no address for " + o.host;
  for (addrinfo* a = res; a; a = a->ai_next) {
    const int fd = ::socket(a->ai_family, a->ai_socktype | SOCK_CLOEXEC, a->ai_protocol);
    if (fd < 0) continue;
    const int flags = ::fcntl(fd, F_GETFL);
    ::fcntl(fd, F_SETFL, flags | O_NONBLOCK);
    int rc = ::connect(fd, a->ai_addr, a->ai_addrlen);
    if (rc != 0 && errno == EINPROGRESS) {
      pollfd pfd{fd, POLLOUT, 0};
      rc = ::poll(&pfd, 1, static_cast<int>(o.connect_timeout.count()));
      if (rc == 0) {
        errno = ETIMEDOUT;
        rc = -1;
      } else if (rc > 0) {
        int err = 0;
        socklen_t len = sizeof err;
        ::getsockopt(fd, SOL_SOCKET, SO_ERROR, &err, &len);
        errno = err;
        rc = err == 0 ? 0 : -1;
      }
    }
    if (rc == 0) {
      ::fcntl(fd, F_SETFL, flags);
      const int one = 1;
      ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
      ::freeaddrinfo(res);
      return fd;
    }
    last = errno_text("connect " + o.host + ":" + port);
    ::close(fd);
  }
  ::freeaddrinfo(res);
  throw TransportError(last);
}

}  // namespace

Client::Client(ClientOptions opts, const Clock* clock) : opts_(std::move(opts)), clock_(clock) {
  if (opts_.qos > 1) throw std::invalid_argument("QoS 2 is not supported");
  fd_ = connect_socket(opts_);
  try {
    send(make_connect(Connect{opts_.client_id, opts_.keepalive_s, true}));
    auto p = read_packet(opts_.connect_timeout);
    if (!p) throw TransportError("no CONNACK within the connect timeout");
    const auto code = parse_connack(*p);
    if (code != ConnackCode::kAccepted) {
      throw TransportError("broker refused connection, code " + std::to_string(static_cast<int>(code)));
    }
  } catch (...) {
    ::close(fd_);
    fd_ = -1;
    throw;
  }
}

Client::~Client() {
  try {
    disconnect();
  } catch (...) {
  }
}

void Client::disconnect() {
  if (fd_ < 0) return;
  const Bytes raw = encode_packet(make_empty(PacketType::kDisconnect));
  (void)::send(fd_, raw.data(), raw.size(), MSG_NOSIGNAL);
  ::close(fd_);
  fd_ = -1;
}

void Client::send(const Packet& p) {
  if (fd_ < 0) throw TransportError("not connected");
  const Bytes raw = encode_packet(p);
  std::size_t off = 0;
  while (off < raw.size()) {
    const ssize_t n = ::send(fd_, raw.data() + off, raw.size() - off, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      const std::string msg = errno_text("send");
      ::close(fd_);
      fd_ = -1;
      throw TransportError(msg);
    }
    off += static_cast<std::size_t>(n);
  }
  last_sent_ = SteadyClock::now();
}

std::optional<Packet> Client::read_packet(std::chrono::milliseconds timeout) {
  const auto deadline = SteadyClock::now() + timeout;
  for (;;) {
    if (auto got = decode_packet(rx_)) {
      rx_.erase(rx_.begin(), rx_.begin() + static_cast<std::ptrdiff_t>(got->second));
      return std::move(got->first);
    }
    if (fd_ < 0) throw TransportError("not connected");
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - SteadyClock::now());
    pollfd pfd{fd_, POLLIN, 0};
    const int rc = ::poll(&pfd, 1, static_cast<int>(std::max<std::int64_t>(left.count(), 0)));
    if (rc < 0) {
      if (errno == EINTR) continue;
      throw TransportError(errno_text("poll"));
    }
    if (rc == 0) return std::nullopt;
    std::uint8_t buf[4096];
    const ssize_t n = ::recv(fd_, buf, sizeof buf, 0);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) {
      const std::string msg = n == 0 ? "broker closed the connection" : errno_text("recv");
      ::close(fd_);
      fd_ = -1;
      throw TransportError(msg);
    }
    rx_.insert(rx_.end(), buf, buf + n);
  }
}

std::uint16_t Client::next_id() {
  do {
    ++last_id_;
  } while (last_id_ == 0 || inflight_.contains(last_id_) || pending_subacks_.contains(last_id_));
  return last_id_;
}

void Client::publish(const std::string& topic, Bytes payload) {
  if (topic.empty() || topic.find_first_of("+#") != std::string::npos) {
    throw std::invalid_argument("publish topic must be non-empty and free of wildcards");
  }
  Publish m{topic, std::move(payload), opts_.qos, 0, false, false};
  if (m.qos > 0) m.packet_id = next_id();
  Packet p = make_publish(m);
  send(p);
  if (m.qos > 0) {
    p.flags |= 0x08;  // a retransmission carries DUP
    inflight_.emplace(m.packet_id, std::move(p));
  }
}

void Client::subscribe(const std::string& pattern, Handler handler) {
  if (!valid_topic_filter(pattern)) throw std::invalid_argument("invalid topic filter: " + pattern);
  handlers_.emplace_back(pattern, std::move(handler));
  const std::uint16_t id = next_id();
  pending_subacks_[id] = std::nullopt;
  send(make_subscribe(Subscribe{id, {{pattern, opts_.qos}}}));
  const auto deadline = SteadyClock::now() + opts_.connect_timeout;
  while (!pending_subacks_[id]) {
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - SteadyClock::now());
    if (left.count() <= 0) {
      pending_subacks_.erase(id);
      throw TransportError("no SUBACK for " + pattern);
    }
    if (auto p = read_packet(left)) handle(*p);
  }
  const auto codes = *pending_subacks_[id];
  pending_subacks_.erase(id);
  if (codes.size() != 1 || codes[0] == kSubackFailure) throw TransportError("broker refused subscription " + pattern);
}

std::size_t Client::handle(const Packet& p) {
  switch (p.type) {
    case PacketType::kPublish: {
      Publish m = parse_publish(p);
      if (m.qos == 1) send(make_puback(m.packet_id));
      Message msg{std::move(m.topic), std::move(m.payload), clock_ ? clock_->now_ms() : 0, ++seq_};
      for (std::size_t i = 0; i < handlers_.size(); ++i) {
        // Copy: a handler may subscribe and grow the vector.
        const auto [filter, h] = handlers_[i];
        if (topic_matches(filter, msg.topic)) h(msg);
      }
      return 1;
    }
    case PacketType::kPuback:
      inflight_.erase(parse_packet_id(p));
      return 0;
    case PacketType::kSuback: {
      if (p.body.size() < 2) throw ProtocolError("truncated SUBACK");
      const auto id = static_cast<std::uint16_t>(p.body[0] << 8 | p.body[1]);
      auto it = pending_subacks_.find(id);
      if (it == pending_subacks_.end()) throw ProtocolError("unexpected SUBACK");
      it->second = parse_suback(p, id);
      return 0;
    }
    case PacketType::kPingresp:
      return 0;
    default:
      throw ProtocolError("unexpected packet from broker");
  }
}

void Client::keepalive() {
  const auto now = SteadyClock::now();
  if (opts_.keepalive_s > 0 && now - last_sent_ >= std::chrono::seconds(opts_.keepalive_s) / 2) {
    send(make_empty(PacketType::kPingreq));
  }
  if (!inflight_.empty() && now - last_sent_ >= kRetransmitAfter) {
    for (const auto& [id, p] : inflight_) send(p);
  }
}

std::size_t Client::poll(std::chrono::milliseconds timeout) {
  keepalive();
  std::size_t delivered = 0;
  auto p = read_packet(timeout);
  while (p) {
    delivered += handle(*p);
    p = read_packet(std::chrono::milliseconds(0));
  }
  return delivered;
}

}  // namespace ebake::transport::mqtt
