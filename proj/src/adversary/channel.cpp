// Copyright 2026 The EBAKE Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "ebake/adversary/channel.hpp"

namespace ebake::adversary {

std::string_view direction_name(Direction d) {
  switch (d) {
    case Direction::kObserved:
      return "observed";
    case Direction::kRewritten:
      return "rewritten";
    case Direction::kInjected:
      return "injected";
  }
  return "?";
}

Adversary::Adversary(transport::Broker& broker) : broker_(broker) {
  broker_.set_interceptor([this](transport::Message& m) { return on_message(m); });
}

Adversary::~Adversary() { broker_.clear_interceptor(); }

transport::Verdict Adversary::on_message(transport::Message& m) {
  transcript_.append({Direction::kObserved, m.topic, m.payload, m.published_at});
  for (const auto& d : drops_) {
    if (d(m)) return transport::Verdict::kDrop;
  }
  bool changed = false;
  for (const auto& r : rewrites_) changed |= r(m);
  if (changed) transcript_.append({Direction::kRewritten, m.topic, m.payload, m.published_at});
  return transport::Verdict::kDeliver;
}

void Adversary::inject(const std::string& topic, Bytes raw, std::uint64_t delay_ms) {
  transcript_.append({Direction::kInjected, topic, raw, broker_.clock().now_ms()});
  broker_.inject(topic, std::move(raw), delay_ms);
}

void Adversary::drop(DropRule rule) { drops_.push_back(std::move(rule)); }
void Adversary::rewrite(RewriteRule rule) { rewrites_.push_back(std::move(rule)); }

void Adversary::clear_rules() {
  drops_.clear();
  rewrites_.clear();
}

void Adversary::replay(std::size_t index, std::uint64_t delay_ms) {
  const Captured c = transcript_.at(index);
  inject(c.topic, c.raw, delay_ms);
}

ExtractedCredentials Adversary::corrupt_device(const das::Device& target) {
  ExtractedCredentials out{target.id(), "das", target.state(), {}};
  out.public_data["topic"] = target.topic();
  corrupted_.insert_or_assign(target.id(), out);
  return out;
}

ExtractedCredentials Adversary::corrupt_device(const protocol::Device& target) {
  // r_d, K_dta and DP_1 stay inside the secure element.
  ExtractedCredentials out{target.id(), "ebake", std::nullopt, {}};
  out.public_data["inbox_topic"] = target.inbox_topic();
  out.public_data["public_key"] = to_hex(target.secure_element().public_key().compressed_bytes());
  corrupted_.insert_or_assign(target.id(), out);
  return out;
}

void Adversary::corrupt_device(const protocol::TrustedAuthority&) {
  throw CorruptionRefused("the trusted authority cannot be corrupted");
}

}  // namespace ebake::adversary
