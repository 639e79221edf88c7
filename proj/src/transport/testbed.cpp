// Copyright 2026 The EBAKE Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "ebake/transport/testbed.hpp"

#include <algorithm>
#include <chrono>
#include <map>

namespace ebake::transport {

std::string_view scheme_name(Scheme s) { return s == Scheme::kEbake ? "ebake" : "das"; }

std::optional<Scheme> parse_scheme(std::string_view s) {
  if (s == "ebake") return Scheme::kEbake;
  if (s == "das") return Scheme::kDas;
  return std::nullopt;
}

EbakeTestbed::EbakeTestbed(Clock& clock, crypto::RandomSource& rng, BrokerConfig broker,
                           protocol::ProtocolConfig cfg)
    : clock_(clock),
      rng_(rng),
      cfg_(cfg),
      broker_(clock, rng, broker),
      ta_(std::make_unique<protocol::TrustedAuthority>(cfg, clock, rng)),
      ta_node_(std::make_unique<TaNode>(broker_, *ta_)) {
  ta_node_->attach();
}

std::size_t EbakeTestbed::add_device(const std::string& label) {
  return add_device(ta_->register_device(DeviceId::from_label(label)));
}

std::size_t EbakeTestbed::add_device(const protocol::DeviceCredentials& creds) {
  devices_.push_back(std::make_unique<protocol::Device>(protocol::SecureElement(creds), cfg_, clock_, rng_));
  nodes_.push_back(std::make_unique<DeviceNode>(broker_, *devices_.back()));
  nodes_.back()->attach();
  return devices_.size() - 1;
}

Outcome<codec::CorrelationId> EbakeTestbed::initiate(std::size_t from, std::size_t to) {
  const auto& target = *devices_.at(to);
  return nodes_.at(from)->initiate(target.id(), target.secure_element().public_key());
}

DasTestbed::DasTestbed(Clock& clock, crypto::RandomSource& rng, BrokerConfig broker, std::uint64_t window_ms)
    : clock_(clock), rng_(rng), window_(window_ms), broker_(clock, rng, broker), authority_(rng) {}

std::size_t DasTestbed::add_device(const std::string& label) {
  devices_.push_back(std::make_unique<das::Device>(authority_.register_device(DeviceId::from_label(label)),
                                                   window_, clock_, rng_));
  nodes_.push_back(std::make_unique<DasNode>(broker_, *devices_.back()));
  nodes_.back()->attach();
  return devices_.size() - 1;
}

codec::CorrelationId DasTestbed::initiate(std::size_t from, std::size_t to) {
  return nodes_.at(from)->initiate(devices_.at(to)->id());
}

nlohmann::json MeasureReport::to_json() const {
  nlohmann::json runs_json = nlohmann::json::array();
  for (const auto& r : runs) {
    nlohmann::json j{{"completed", r.completed},
                     {"keys_match", r.keys_match},
                     {"initiator_ok", r.initiator_ok},
                     {"responder_agrees", r.responder_agrees},
                     {"rtt_ms", r.rtt_ms}};
    if (r.failure) j["failure"] = std::string(reason_name(*r.failure));
    if (!r.topic.empty()) j["topic"] = r.topic;
    runs_json.push_back(std::move(j));
  }
  return {{"scheme", scheme_name(scheme)},
          {"runs", runs.size()},
          {"completed", completed},
          {"rtt_ms", {{"mean", mean_rtt_ms}, {"min", min_rtt_ms}, {"max", max_rtt_ms}}},
          {"elapsed_ms", elapsed_ms},
          {"throughput_per_min", throughput_per_min},
          {"broker",
           {{"published", metrics.published},
            {"delivered", metrics.delivered},
            {"lost", metrics.lost},
            {"pdr", metrics.pdr()}}},
          {"handshakes", std::move(runs_json)}};
}

namespace {

using WallClock = std::chrono::steady_clock;

struct Stamp {
  std::uint64_t sim = 0;
  WallClock::time_point wall;
};

double rtt_between(const Stamp& a, const Stamp& b) {
  return static_cast<double>(b.sim - a.sim) + std::chrono::duration<double, std::milli>(b.wall - a.wall).count();
}

class Runner {
 public:
  Runner(const MeasureOptions& opts) : opts_(opts), rng_(opts.seed) {}

  MeasureReport run() {
    report_.scheme = opts_.scheme;
    if (opts_.scheme == Scheme::kEbake) {
      run_ebake();
    } else {
      run_das();
    }
    summarize();
    return report_;
  }

 private:
  template <class StartFn, class CollectFn, class Broker_>
  void batches(Broker_& broker, StartFn start, CollectFn collect, std::uint64_t timeout_ms) {
    std::size_t done = 0;
    const std::size_t k = std::max<std::size_t>(1, opts_.concurrency);
    while (done < opts_.runs) {
      const std::size_t n = std::min(k, opts_.runs - done);
      const Stamp begin{clock_.now_ms(), WallClock::now()};
      std::vector<std::optional<codec::CorrelationId>> corrs;
      for (std::size_t i = 0; i < n; ++i) corrs.push_back(start());
      broker.run();
      const Stamp end{clock_.now_ms(), WallClock::now()};
      report_.elapsed_ms += rtt_between(begin, end);
      bool incomplete = false;
      for (const auto& c : corrs) {
        HandshakeRecord rec = collect(c, begin);
        incomplete |= !rec.completed;
        report_.runs.push_back(std::move(rec));
      }
      if (incomplete) expire(timeout_ms);
      done += n;
    }
    report_.metrics = broker.metrics();
  }

  void expire(std::uint64_t timeout_ms) {
    clock_.advance(timeout_ms + 1);
    if (expire_hook_) expire_hook_();
  }

  void run_ebake() {
    EbakeTestbed tb(clock_, rng_, opts_.broker, opts_.protocol);
    const auto a = tb.add_device("measure-x");
    const auto b = tb.add_device("measure-y");
    std::map<std::string, Stamp> accepted;  // session topic -> initiator acceptance
    tb.node(a).on_established = [&](const protocol::SessionKey& sk) {
      accepted[sk.topic] = Stamp{clock_.now_ms(), WallClock::now()};
    };
    expire_hook_ = [&] {
      tb.device(a).expire();
      tb.device(b).expire();
      tb.ta().expire_pending();
    };
    auto start = [&]() -> std::optional<codec::CorrelationId> {
      auto c = tb.initiate(a, b);
      if (!c) return std::nullopt;
      return c.value();
    };
    auto collect = [&](const std::optional<codec::CorrelationId>& c, const Stamp& begin) {
      HandshakeRecord rec;
      if (!c) {
        rec.failure = FailureReason::kPeerBlocked;
        return rec;
      }
      const auto ini = tb.device(a).session(*c);
      const auto resp = tb.device(b).session(*c);
      const auto rkey = tb.device(b).responder_key(*c);
      rec.initiator_ok = ini.has_value();
      rec.completed = ini && resp;
      rec.keys_match = rec.completed && ini->key == resp->key;
      rec.responder_agrees = ini && rkey && *rkey == ini->key;
      if (ini) {
        rec.topic = ini->topic;
        rec.rtt_ms = rtt_between(begin, accepted.at(ini->topic));
      }
      if (!rec.completed) rec.failure = FailureReason::kTimeout;
      return rec;
    };
    batches(tb.broker(), start, collect, tb.config().handshake_timeout_ms());
  }

  void run_das() {
    DasTestbed tb(clock_, rng_, opts_.broker, opts_.protocol.freshness_window_ms);
    const auto a = tb.add_device("measure-x");
    const auto b = tb.add_device("measure-y");
    std::map<codec::CorrelationId, Stamp> accepted;
    std::map<codec::CorrelationId, crypto::Digest> ini_keys, resp_keys;
    tb.node(a).on_established = [&](const das::Established& e) {
      accepted[e.correlation] = Stamp{clock_.now_ms(), WallClock::now()};
      ini_keys.insert_or_assign(e.correlation, e.key);
    };
    tb.node(b).on_established = [&](const das::Established& e) { resp_keys.insert_or_assign(e.correlation, e.key); };
    auto start = [&]() -> std::optional<codec::CorrelationId> { return tb.initiate(a, b); };
    auto collect = [&](const std::optional<codec::CorrelationId>& c, const Stamp& begin) {
      HandshakeRecord rec;
      const auto ini = ini_keys.find(*c);
      const auto resp = resp_keys.find(*c);
      rec.initiator_ok = ini != ini_keys.end();
      rec.completed = rec.initiator_ok && resp != resp_keys.end();
      rec.keys_match = rec.completed && ini->second == resp->second;
      rec.responder_agrees = rec.keys_match;
      if (rec.initiator_ok) rec.rtt_ms = rtt_between(begin, accepted.at(*c));
      if (!rec.completed) rec.failure = FailureReason::kTimeout;
      return rec;
    };
    batches(tb.broker(), start, collect, 4 * tb.window());
  }

  void summarize() {
    double sum = 0.0;
    std::size_t accepted = 0;
    bool first = true;
    for (const auto& r : report_.runs) {
      if (r.completed) ++report_.completed;
      if (!r.initiator_ok) continue;
      ++accepted;
      sum += r.rtt_ms;
      report_.min_rtt_ms = first ? r.rtt_ms : std::min(report_.min_rtt_ms, r.rtt_ms);
      report_.max_rtt_ms = std::max(report_.max_rtt_ms, r.rtt_ms);
      first = false;
    }
    if (accepted > 0) report_.mean_rtt_ms = sum / static_cast<double>(accepted);
    if (report_.elapsed_ms > 0) {
      report_.throughput_per_min = static_cast<double>(report_.metrics.delivered) / (report_.elapsed_ms / 60000.0);
    }
  }

  const MeasureOptions& opts_;
  ManualClock clock_;
  crypto::DeterministicRandom rng_;
  MeasureReport report_;
  std::function<void()> expire_hook_;
};

}  // namespace

MeasureReport measure_handshake(const MeasureOptions& opts) { return Runner(opts).run(); }

}  // namespace ebake::transport
