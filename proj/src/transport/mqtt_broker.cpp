// Copyright 2026 The EBAKE Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#include <arpa/inet.h>
#include <fcntl.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <mutex>

#include "ebake/transport/mqtt.hpp"

namespace ebake::transport::mqtt {

namespace {

struct Session {
  int fd = -1;
  bool connected = false;
  std::string client_id;
  Bytes rx;
  std::vector<std::pair<std::string, std::uint8_t>> subs;
  std::uint16_t last_id = 0;
  bool closing = false;
};

bool send_all(int fd, const Bytes& raw) {
  std::size_t off = 0;
  while (off < raw.size()) {
    const ssize_t n = ::send(fd, raw.data() + off, raw.size() - off, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    off += static_cast<std::size_t>(n);
  }
  return true;
}

}  // namespace

struct LoopbackBroker::Impl {
  std::map<int, Session> sessions;
  mutable std::mutex stats_mu;
  BrokerStats stats;
  std::uint64_t anon = 0;

  void send(Session& s, const Packet& p) {
    if (!s.closing && !send_all(s.fd, encode_packet(p))) s.closing = true;
  }

  void route(const Publish& in) {
    for (auto& [fd, s] : sessions) {
      if (!s.connected || s.closing) continue;
      int granted = -1;
      for (const auto& [filter, qos] : s.subs) {
        if (topic_matches(filter, in.topic)) granted = std::max<int>(granted, qos);
      }
      if (granted < 0) continue;
      Publish out{in.topic, in.payload, static_cast<std::uint8_t>(std::min<int>(granted, in.qos)), 0, false, false};
      if (out.qos > 0) {
        if (++s.last_id == 0) ++s.last_id;
        out.packet_id = s.last_id;
      }
      send(s, make_publish(out));
      std::lock_guard lock(stats_mu);
      ++stats.publishes_out;
    }
  }

  void handle(Session& s, const Packet& p) {
    if (!s.connected) {
      const Connect c = parse_connect(p);
      for (auto& [fd, other] : sessions) {
        // A second connection with the same client id replaces the first.
        if (&other != &s && other.connected && !c.client_id.empty() && other.client_id == c.client_id) {
          other.closing = true;
        }
      }
      s.client_id = c.client_id.empty() ? "anon-" + std::to_string(++anon) : c.client_id;
      s.connected = true;
      send(s, make_connack(ConnackCode::kAccepted));
      return;
    }
    switch (p.type) {
      case PacketType::kPublish: {
        const Publish m = parse_publish(p);
        if (m.topic.empty() || m.topic.find_first_of("+#") != std::string::npos) {
          throw ProtocolError("publish to a wildcard topic");
        }
        if (m.qos == 1) send(s, make_puback(m.packet_id));
        {
          std::lock_guard lock(stats_mu);
          ++stats.publishes_in;
        }
        route(m);
        return;
      }
      case PacketType::kPuback:
        (void)parse_packet_id(p);
        return;
      case PacketType::kSubscribe: {
        const Subscribe sub = parse_subscribe(p);
        std::vector<std::uint8_t> codes;
        for (const auto& [filter, qos] : sub.filters) {
          if (!valid_topic_filter(filter)) {
            codes.push_back(kSubackFailure);
            continue;
          }
          const auto granted = static_cast<std::uint8_t>(std::min<int>(qos, 1));
          std::erase_if(s.subs, [&](const auto& e) { return e.first == filter; });
          s.subs.emplace_back(filter, granted);
          codes.push_back(granted);
        }
        send(s, make_suback(sub.packet_id, codes));
        return;
      }
      case PacketType::kUnsubscribe: {
        if (p.flags != 0x02 || p.body.size() < 2) throw ProtocolError("malformed UNSUBSCRIBE");
        const auto id = static_cast<std::uint16_t>(p.body[0] << 8 | p.body[1]);
        std::size_t pos = 2;
        while (pos + 2 <= p.body.size()) {
          const std::size_t n = static_cast<std::size_t>(p.body[pos] << 8 | p.body[pos + 1]);
          if (pos + 2 + n > p.body.size()) throw ProtocolError("truncated UNSUBSCRIBE");
          const std::string filter(reinterpret_cast<const char*>(p.body.data() + pos + 2), n);
          std::erase_if(s.subs, [&](const auto& e) { return e.first == filter; });
          pos += 2 + n;
        }
        if (pos != p.body.size()) throw ProtocolError("trailing bytes in UNSUBSCRIBE");
        send(s, make_unsuback(id));
        return;
      }
      case PacketType::kPingreq:
        send(s, make_empty(PacketType::kPingresp));
        return;
      case PacketType::kDisconnect:
        s.closing = true;
        return;
      default:
        throw ProtocolError("unexpected packet from client");
    }
  }
};

LoopbackBroker::LoopbackBroker(std::uint16_t port) : impl_(std::make_unique<Impl>()) {
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0);
  if (listen_fd_ < 0) throw TransportError(std::string("socket: ") + std::strerror(errno));
  const int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = htons(port);
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 || ::listen(listen_fd_, 16) != 0) {
    const std::string msg = std::string("bind 127.0.0.1:") + std::to_string(port) + ": " + std::strerror(errno);
    ::close(listen_fd_);
    throw TransportError(msg);
  }
  socklen_t len = sizeof addr;
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
  if (::pipe2(wake_fd_, O_CLOEXEC) != 0) {
    ::close(listen_fd_);
    throw TransportError(std::string("pipe: ") + std::strerror(errno));
  }
  thread_ = std::thread([this] { loop(); });
}

LoopbackBroker::~LoopbackBroker() { stop(); }

void LoopbackBroker::stop() {
  if (running_.exchange(false)) {
    const char b = 1;
    (void)!::write(wake_fd_[1], &b, 1);
  }
  if (thread_.joinable()) thread_.join();
  for (int* fd : {&listen_fd_, &wake_fd_[0], &wake_fd_[1]}) {
    if (*fd >= 0) ::close(*fd);
    *fd = -1;
  }
}

BrokerStats LoopbackBroker::stats() const {
  std::lock_guard lock(impl_->stats_mu);
  return impl_->stats;
}

void LoopbackBroker::loop() {
  auto& sessions = impl_->sessions;
  while (running_) {
    std::vector<pollfd> fds{{listen_fd_, POLLIN, 0}, {wake_fd_[0], POLLIN, 0}};
    for (const auto& [fd, s] : sessions) fds.push_back({fd, POLLIN, 0});
    if (::poll(fds.data(), fds.size(), 1000) < 0 && errno != EINTR) break;
    if (!running_) break;
    if (fds[0].revents & POLLIN) {
      const int cfd = ::accept4(listen_fd_, nullptr, nullptr, SOCK_CLOEXEC);
      if (cfd >= 0) {
        const int one = 1;
        ::setsockopt(cfd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
        sessions[cfd].fd = cfd;
        std::lock_guard lock(impl_->stats_mu);
        ++impl_->stats.connections;
      }
    }
    for (std::size_t i = 2; i < fds.size(); ++i) {
      if (!fds[i].revents) continue;
      auto it = sessions.find(fds[i].fd);
      if (it == sessions.end()) continue;
      Session& s = it->second;
      std::uint8_t buf[4096];
      const ssize_t n = ::recv(s.fd, buf, sizeof buf, 0);
      if (n <= 0) {
        if (n < 0 && errno == EINTR) continue;
        s.closing = true;
        continue;
      }
      s.rx.insert(s.rx.end(), buf, buf + n);
      try {
        while (!s.closing) {
          auto got = decode_packet(s.rx);
          if (!got) break;
          s.rx.erase(s.rx.begin(), s.rx.begin() + static_cast<std::ptrdiff_t>(got->second));
          impl_->handle(s, got->first);
        }
      } catch (const std::exception&) {
        std::lock_guard lock(impl_->stats_mu);
        ++impl_->stats.protocol_errors;
        s.closing = true;
      }
    }
    for (auto it = sessions.begin(); it != sessions.end();) {
      if (it->second.closing) {
        ::close(it->first);
        it = sessions.erase(it);
      } else {
        ++it;
      }
    }
  }
  for (auto& [fd, s] : sessions) ::close(fd);
  sessions.clear();
}

}  // namespace ebake::transport::mqtt
