// Copyright 2026 The EBAKE Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "ebake/transport/broker.hpp"

#include <stdexcept>

namespace ebake::transport {

namespace {

std::vector<std::string_view> split_levels(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find('/', start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace

bool valid_topic_filter(std::string_view pattern) {
  if (pattern.empty()) return false;
  const auto levels = split_levels(pattern);
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const auto lv = levels[i];
    if (lv.find('#') != std::string_view::npos && (lv != "#" || i + 1 != levels.size())) return false;
    if (lv.find('+') != std::string_view::npos && lv != "+") return false;
  }
  return true;
}

bool topic_matches(std::string_view pattern, std::string_view topic) {
  const auto p = split_levels(pattern);
  const auto t = split_levels(topic);
  std::size_t i = 0;
  for (; i < p.size(); ++i) {
    if (p[i] == "#") return true;
    if (i >= t.size()) return false;
    if (p[i] != "+" && p[i] != t[i]) return false;
  }
  return i == t.size();
}

Broker::Broker(Clock& clock, crypto::RandomSource& rng, BrokerConfig cfg) : clock_(clock), rng_(rng), cfg_(cfg) {
  if (cfg_.loss.loss_probability < 0.0 || cfg_.loss.loss_probability > 1.0) {
    throw std::invalid_argument("loss probability must be in [0, 1]");
  }
  if (cfg_.loss.min_delay_ms > cfg_.loss.max_delay_ms) throw std::invalid_argument("min delay exceeds max delay");
}

void Broker::subscribe(const std::string& pattern, Handler handler) {
  if (!valid_topic_filter(pattern)) throw std::invalid_argument("invalid topic filter: " + pattern);
  std::lock_guard lock(mu_);
  subs_.emplace_back(pattern, std::move(handler));
}

void Broker::publish(const std::string& topic, Bytes payload) { send(topic, std::move(payload)); }

Receipt Broker::enqueue(Message msg, std::uint64_t delay_ms) {
  const std::uint64_t at = clock_.now_ms() + delay_ms;
  Receipt r{msg.seq, true, at};
  queue_.push(Pending{at, std::move(msg)});
  return r;
}

Receipt Broker::send(const std::string& topic, Bytes payload) {
  if (topic.empty() || topic.find_first_of("+#") != std::string::npos) {
    throw std::invalid_argument("publish topic must be nonempty and wildcard free");
  }
  std::lock_guard lock(mu_);
  Message msg{topic, std::move(payload), clock_.now_ms(), next_seq_++};
  ++metrics_.published;
  if (interceptor_ && interceptor_(msg) == Verdict::kDrop) {
    ++metrics_.dropped;
    return Receipt{msg.seq, false, 0};
  }
  std::uint64_t delay = 0;
  if (cfg_.mode == DeliveryMode::kLossy) {
    if (rng_.uniform01() < cfg_.loss.loss_probability) {
      ++metrics_.lost;
      return Receipt{msg.seq, false, 0};
    }
    delay = rng_.uniform(cfg_.loss.min_delay_ms, cfg_.loss.max_delay_ms);
  }
  return enqueue(std::move(msg), delay);
}

Receipt Broker::inject(const std::string& topic, Bytes payload, std::uint64_t delay_ms) {
  std::lock_guard lock(mu_);
  Message msg{topic, std::move(payload), clock_.now_ms(), next_seq_++};
  ++metrics_.injected;
  return enqueue(std::move(msg), delay_ms);
}

void Broker::set_interceptor(Interceptor i) {
  std::lock_guard lock(mu_);
  interceptor_ = std::move(i);
}

void Broker::clear_interceptor() {
  std::lock_guard lock(mu_);
  interceptor_ = nullptr;
}

bool Broker::step() {
  Message msg;
  std::vector<Handler> targets;
  std::uint64_t at = 0;
  {
    std::lock_guard lock(mu_);
    if (queue_.empty()) return false;
    at = queue_.top().deliver_at;
    msg = queue_.top().msg;
    queue_.pop();
    ++metrics_.delivered;
    for (const auto& [pattern, h] : subs_) {
      if (topic_matches(pattern, msg.topic)) targets.push_back(h);
    }
    if (targets.empty()) ++metrics_.unrouted;
    metrics_.deliveries += targets.size();
  }
  clock_.wait_until(at);
  for (const auto& h : targets) h(msg);
  return true;
}

std::size_t Broker::run(std::size_t max_messages) {
  std::size_t n = 0;
  while (n < max_messages && step()) ++n;
  return n;
}

std::size_t Broker::queued() const {
  std::lock_guard lock(mu_);
  return queue_.size();
}

Metrics Broker::metrics() const {
  std::lock_guard lock(mu_);
  return metrics_;
}

void Broker::reset_metrics() {
  std::lock_guard lock(mu_);
  metrics_ = Metrics{};
}

}  // namespace ebake::transport
