// Copyright 2026 The EBAKE Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "ebake/cli/app.hpp"

#include <sys/stat.h>

#include <atomic>
#include <csignal>
#include <cstdio>
#include <memory>
#include <thread>

#include "CLI11.hpp"
#include "ebake/adversary/attacks.hpp"
#include "ebake/bench/bench.hpp"
#include "ebake/cli/config.hpp"
#include "ebake/core/atomic_file.hpp"
#include "ebake/transport/mqtt.hpp"
#include "ebake/transport/nodes.hpp"
#include "ebake/transport/testbed.hpp"

namespace ebake::cli {

namespace {

using codec::MsgType;
using crypto::OpCounters;
using transport::Scheme;
using namespace std::chrono_literals;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ProtocolFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::atomic<bool> g_stop{false};
constexpr std::chrono::milliseconds kForever = std::chrono::hours(24 * 365 * 100);

extern "C" void on_signal(int) { g_stop = true; }

std::string fmt_ms(double ms) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f ms", ms);
  return buf;
}

std::string pad(std::string s, std::size_t w) {
  if (s.size() < w) s.append(w - s.size(), ' ');
  return s;
}

/// File stem for a device: its label when that is a safe file name, else hex.
std::string file_stem(const DeviceId& id) {
  const std::string d = id.display();
  const bool safe = !d.empty() && d[0] != '.' && d.find_first_not_of(
      "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789._-") == std::string::npos;
  return safe ? d : id.hex();
}

DeviceId parse_id(const std::string& label) {
  try {
    return DeviceId::from_label(label);
  } catch (const std::invalid_argument& e) {
    throw UsageError("invalid device id '" + label + "': " + e.what());
  }
}

struct Context {
  Config cfg;
  std::ostream& out;
  std::ostream& err;
  std::unique_ptr<crypto::RandomSource> owned_rng;
  crypto::RandomSource* rng = nullptr;

  Context(Config c, std::ostream& o, std::ostream& e) : cfg(std::move(c)), out(o), err(e) {
    if (cfg.seed) {
      owned_rng = std::make_unique<crypto::DeterministicRandom>(*cfg.seed);
      rng = owned_rng.get();
    } else {
      rng = &crypto::system_random();
    }
  }

  std::unique_ptr<protocol::TrustedAuthority> load_ta(const Clock& clock) const {
    if (!std::filesystem::exists(cfg.registry)) {
      throw UsageError("registry not found: " + cfg.registry.string() + " (run 'ebake ta init' first)");
    }
    try {
      return protocol::TrustedAuthority::load(cfg.registry, cfg.protocol(), clock, *rng);
    } catch (const codec::ParseError& e) {
      throw UsageError("registry " + cfg.registry.string() + ": " + e.what());
    }
  }

  /// `ref` is a credential file path or a device id resolved in the
  /// credentials directory.
  protocol::DeviceCredentials load_credentials(const std::string& ref) const {
    std::filesystem::path path = ref;
    if (!std::filesystem::is_regular_file(path)) path = cfg.credential_path(file_stem(parse_id(ref)));
    if (!std::filesystem::is_regular_file(path)) {
      throw UsageError("no credentials for '" + ref + "' (looked for " + path.string() + ")");
    }
    try {
      return protocol::credentials_from_json(read_file(path));
    } catch (const codec::ParseError& e) {
      throw UsageError(path.string() + ": " + e.what());
    }
  }
};

// ---------------------------------------------------------------- ta

void cmd_ta_init(Context& ctx, bool force) {
  if (std::filesystem::exists(ctx.cfg.registry) && !force) {
    throw UsageError("registry exists: " + ctx.cfg.registry.string() + " (use --force to replace it)");
  }
  SystemClock clock;
  protocol::TrustedAuthority ta(ctx.cfg.protocol(), clock, *ctx.rng);
  ta.save(ctx.cfg.registry);
  ctx.out << "registry created: " << ctx.cfg.registry.string() << " (K_dta generation 0)\n";
}

void cmd_ta_register(Context& ctx, const std::vector<std::string>& labels) {
  SystemClock clock;
  auto ta = ctx.load_ta(clock);
  std::vector<DeviceId> ids;
  for (const auto& l : labels) {
    const DeviceId id = parse_id(l);
    if (ta->lookup(id) || std::find(ids.begin(), ids.end(), id) != ids.end()) {
      throw UsageError("identity exists: " + id.display());
    }
    ids.push_back(id);
  }
  std::filesystem::create_directories(ctx.cfg.credentials_dir);
  ::chmod(ctx.cfg.credentials_dir.c_str(), 0700);
  for (const auto& id : ids) {
    const auto creds = ta->register_device(id);
    const auto path = ctx.cfg.credential_path(file_stem(id));
    write_file_atomic(path, protocol::credentials_to_json(creds), 0600);
    const auto info = ta->public_info(id);
    ctx.out << "registered " << id.display() << "  generation " << creds.kdta_generation << "  inbox "
            << info->inbox_topic << "  credentials " << path.string() << "\n";
  }
  ta->save(ctx.cfg.registry);
}

void cmd_ta_rotate(Context& ctx) {
  SystemClock clock;
  auto ta = ctx.load_ta(clock);
  ta->rotate_kdta();
  ta->save(ctx.cfg.registry);
  ctx.out << "K_dta rotated: generation " << ta->kdta_generation()
          << "; devices on older generations can only pair within their generation until re-provisioned\n";
}

void cmd_ta_list(Context& ctx) {
  SystemClock clock;
  auto ta = ctx.load_ta(clock);
  ctx.out << "registry " << ctx.cfg.registry.string() << ": " << ta->registry_size() << " device(s), K_dta generation "
          << ta->kdta_generation() << "\n";
  for (const auto& d : ta->directory()) {
    ctx.out << "  " << pad(d.id.display(), 18) << " generation " << ta->lookup(d.id)->kdta_generation << "  "
            << d.inbox_topic << "\n";
  }
}

// --------------------------------------------------- in-process handshakes

struct Step {
  std::string number;
  std::string entity;
  std::string action;
  double ms = 0.0;
  OpCounters ops;
};

struct Trace {
  std::vector<Step> steps;
  std::optional<std::string> topic;
  std::optional<std::string> initiator_fp;
  std::optional<std::string> responder_fp;
  std::optional<std::string> failure;  // "step N (entity, action): reason: detail"
};

struct StepLabel {
  const char* number;
  const char* entity;
  const char* action;
};

StepLabel label_for(MsgType t) {
  switch (t) {
    case MsgType::kMsg1: return {"2", "TA", "verify Msg1, send Msg2"};
    case MsgType::kMsg2: return {"3", "D_y", "verify Msg2, send Msg3"};
    case MsgType::kMsg3: return {"4", "TA", "verify Msg3, send Msg4 and topic notice"};
    case MsgType::kMsg4: return {"5", "D_x", "verify Msg4, accept key"};
    case MsgType::kTopicNotice: return {"5", "D_y", "accept session topic"};
    case MsgType::kDasMsg1: return {"2", "D_y", "verify M1, send M2"};
    case MsgType::kDasMsg2: return {"3", "D_x", "verify M2, send M3"};
    case MsgType::kDasMsg3: return {"4", "D_y", "verify M3, accept key"};
  }
  return {"?", "?", "unknown message"};
}

std::string describe_failure(const StepLabel& l, const Failure& f) {
  return std::string("step ") + l.number + " (" + l.entity + ", " + l.action + "): " +
         std::string(reason_name(f.reason)) + ": " + f.detail;
}

OpCounters minus(const OpCounters& a, const OpCounters& b) {
  return OpCounters{a.sym - b.sym, a.asym - b.asym, a.hash - b.hash, a.xor_ops - b.xor_ops,
                    a.point_mul - b.point_mul, a.point_add - b.point_add};
}

struct StatsRef {
  std::function<transport::NodeStats()> get;
  transport::NodeStats stats() const { return get(); }
};

/// Delivers queued messages one at a time, attributing each step's compute
/// time and counters to the node that handled it.
void drive(transport::Broker& broker, const std::vector<StatsRef*>& nodes, Trace& trace, std::optional<Failure>& failed) {
  std::optional<MsgType> last;
  broker.subscribe("#", [&](const transport::Message& m) {
    try {
      last = codec::decode_envelope(m.payload).type;
    } catch (const codec::ParseError&) {
      last.reset();
    }
  });
  while (broker.queued() > 0 && !trace.failure) {
    std::vector<transport::NodeStats> before;
    for (auto* n : nodes) before.push_back(n->stats());
    last.reset();
    broker.step();
    if (!last) continue;
    const StepLabel l = label_for(*last);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const auto after = nodes[i]->stats();
      if (after.handled == before[i].handled) continue;
      trace.steps.push_back({l.number, l.entity, l.action, after.compute_ms - before[i].compute_ms,
                             minus(after.ops, before[i].ops)});
    }
    if (failed) trace.failure = describe_failure(l, *failed);
  }
}

Trace ebake_in_process(Context& ctx, ManualClock& clock, protocol::TrustedAuthority& ta,
                       const protocol::DeviceCredentials& cx, const protocol::DeviceCredentials& cy) {
  Trace trace;
  transport::Broker broker(clock, *ctx.rng);
  protocol::Device dx(protocol::SecureElement(cx), ctx.cfg.protocol(), clock, *ctx.rng);
  protocol::Device dy(protocol::SecureElement(cy), ctx.cfg.protocol(), clock, *ctx.rng);
  transport::TaNode ta_node(broker, ta);
  transport::DeviceNode x(broker, dx);
  transport::DeviceNode y(broker, dy);
  std::optional<Failure> failed;
  ta_node.on_result = [&](const protocol::HandleResult& r) {
    if (r.failure) failed = r.failure;
  };
  x.on_failure = [&](const Failure& f) { failed = f; };
  y.on_failure = [&](const Failure& f) { failed = f; };
  ta_node.attach();
  x.attach();
  y.attach();

  const auto info = ta.public_info(cy.id);
  if (!info) throw UsageError("responder " + cy.id.display() + " is not in the registry");
  const auto before = x.stats();
  const auto corr = x.initiate(cy.id, info->q_d);
  const auto after = x.stats();
  trace.steps.push_back({"1", "D_x", "build Msg1", after.compute_ms - before.compute_ms, minus(after.ops, before.ops)});
  if (!corr) {
    trace.failure = describe_failure({"1", "D_x", "build Msg1"}, corr.failure());
    return trace;
  }
  StatsRef rx{[&] { return x.stats(); }}, rt{[&] { return ta_node.stats(); }}, ry{[&] { return y.stats(); }};
  std::vector<StatsRef*> nodes{&rx, &rt, &ry};
  drive(broker, nodes, trace, failed);
  if (trace.failure) return trace;

  const auto ks = dx.session(corr.value());
  const auto rs = dy.session(corr.value());
  if (!ks || !rs) {
    clock.advance(ctx.cfg.protocol().handshake_timeout_ms() + 1);
    dx.expire();
    dy.expire();
    trace.failure = std::string("timeout: ") + (!ks ? "initiator" : "responder") + " did not complete within " +
                    std::to_string(ctx.cfg.protocol().handshake_timeout_ms()) + " ms";
    return trace;
  }
  trace.topic = ks->topic;
  trace.initiator_fp = ks->fingerprint();
  trace.responder_fp = rs->fingerprint();
  if (ks->key != rs->key || ks->topic != rs->topic) trace.failure = "key confirmation: the two sides disagree";
  return trace;
}

Trace das_in_process(Context& ctx, ManualClock& clock, const DeviceId& ix, const DeviceId& iy) {
  Trace trace;
  transport::DasTestbed tb(clock, *ctx.rng, {}, ctx.cfg.freshness_window_ms);
  const auto a = tb.add_device(ix.display());
  const auto b = tb.add_device(iy.display());
  std::optional<Failure> failed;
  tb.node(a).on_failure = [&](const Failure& f) { failed = f; };
  tb.node(b).on_failure = [&](const Failure& f) { failed = f; };
  const auto before = tb.node(a).stats();
  tb.initiate(a, b);
  const auto after = tb.node(a).stats();
  trace.steps.push_back({"1", "D_x", "build M1", after.compute_ms - before.compute_ms, minus(after.ops, before.ops)});
  StatsRef rx{[&] { return tb.node(a).stats(); }}, ry{[&] { return tb.node(b).stats(); }};
  std::vector<StatsRef*> nodes{&rx, &ry};
  drive(tb.broker(), nodes, trace, failed);
  if (trace.failure) return trace;
  const auto& sx = tb.device(a).sessions();
  const auto& sy = tb.device(b).sessions();
  if (sx.empty() || sy.empty()) {
    trace.failure = "timeout: handshake did not complete";
    return trace;
  }
  trace.initiator_fp = protocol::key_fingerprint(sx.back().key);
  trace.responder_fp = protocol::key_fingerprint(sy.back().key);
  if (sx.back().key != sy.back().key) trace.failure = "key confirmation: the two sides disagree";
  return trace;
}

void print_trace(Context& ctx, const Trace& t, const std::string& scheme, const std::string& from,
                 const std::string& to) {
  auto& o = ctx.out;
  o << "scheme     " << scheme << "\n";
  o << "initiator  " << from << "\n";
  o << "responder  " << to << "\n";
  OpCounters total;
  double total_ms = 0.0;
  for (const auto& s : t.steps) {
    o << "step " << s.number << "  " << pad(s.entity, 4) << pad(s.action, 42) << pad(fmt_ms(s.ms), 12)
      << s.ops.to_string() << "\n";
    total += s.ops;
    total_ms += s.ms;
  }
  o << "total      " << fmt_ms(total_ms) << "  " << total.to_string() << "\n";
  if (t.topic) o << "topic      " << *t.topic << "\n";
  if (t.initiator_fp) o << "initiator SK fingerprint  " << *t.initiator_fp << "\n";
  if (t.responder_fp) o << "responder SK fingerprint  " << *t.responder_fp << "\n";
  if (t.failure) {
    o << "result     FAILED " << *t.failure << "\n";
    ctx.err << "handshake failed at " << *t.failure << "\n";
  } else {
    o << "result     ok\n";
  }
}

// -------------------------------------------------------------- live mode

/// Polls `client` until `done` or `budget` elapses or a signal arrives.
template <class Pred>
bool pump(transport::mqtt::Client& client, std::chrono::milliseconds budget, Pred done) {
  const auto deadline = std::chrono::steady_clock::now() + budget;
  while (!done()) {
    if (g_stop || std::chrono::steady_clock::now() >= deadline) return false;
    client.poll(50ms);
  }
  return true;
}

struct SignalGuard {
  SignalGuard() {
    g_stop = false;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
  }
  ~SignalGuard() {
    std::signal(SIGINT, SIG_DFL);
    std::signal(SIGTERM, SIG_DFL);
  }
};

int handshake_live(Context& ctx, const protocol::DeviceCredentials& cx, const DeviceId& responder) {
  SystemClock clock;
  auto ta = ctx.load_ta(clock);  // public directory only
  const auto info = ta->public_info(responder);
  if (!info) throw UsageError("responder " + responder.display() + " is not in the registry");
  protocol::Device dx(protocol::SecureElement(cx), ctx.cfg.protocol(), clock, *ctx.rng);
  transport::mqtt::Client bus(ctx.cfg.mqtt(file_stem(cx.id)), &clock);
  transport::DeviceNode node(bus, dx);
  std::optional<Failure> failed;
  node.on_failure = [&](const Failure& f) { failed = f; };
  node.attach();
  SignalGuard guard;
  const auto started = std::chrono::steady_clock::now();
  const auto corr = node.initiate(responder, info->q_d);
  if (!corr) throw ProtocolFailure("step 1 (D_x, build Msg1): " + std::string(reason_name(corr.reason())));
  const auto budget = std::chrono::milliseconds(ctx.cfg.protocol().handshake_timeout_ms());
  pump(bus, budget, [&] { return failed || dx.session(corr.value()); });
  const double rtt = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
  ctx.out << "scheme     ebake (live-mqtt " << ctx.cfg.mqtt_host << ":" << ctx.cfg.mqtt_port << ")\n";
  ctx.out << "initiator  " << cx.id.display() << "\nresponder  " << responder.display() << "\n";
  ctx.out << "compute    " << fmt_ms(node.stats().compute_ms) << "  " << node.stats().ops.to_string() << "\n";
  if (failed) {
    throw ProtocolFailure("step 5 (D_x, verify Msg4, accept key): " + std::string(reason_name(failed->reason)) + ": " +
                          failed->detail);
  }
  const auto sk = dx.session(corr.value());
  if (!sk) throw ProtocolFailure("timeout: no Msg4 within " + std::to_string(budget.count()) + " ms");
  ctx.out << "rtt        " << fmt_ms(rtt) << "\ntopic      " << sk->topic << "\n";
  ctx.out << "initiator SK fingerprint  " << sk->fingerprint() << "\nresult     ok\n";
  return kExitOk;
}

int cmd_handshake(Context& ctx, const std::string& initiator, const std::string& responder, const std::string& scheme_s) {
  const auto scheme = transport::parse_scheme(scheme_s);
  if (!scheme) throw UsageError("unknown scheme '" + scheme_s + "' (ebake or das)");
  if (*scheme == Scheme::kDas) {
    if (ctx.cfg.transport != TransportMode::kInProcess) throw UsageError("das handshakes run in-process only");
    ManualClock clock(ctx.cfg.clock_start(SystemClock{}.now_ms()));
    const DeviceId ix = parse_id(initiator);
    const DeviceId iy = parse_id(responder);
    const Trace t = das_in_process(ctx, clock, ix, iy);
    print_trace(ctx, t, "das", ix.display(), iy.display());
    return t.failure ? kExitProtocol : kExitOk;
  }
  const auto cx = ctx.load_credentials(initiator);
  if (ctx.cfg.transport == TransportMode::kLiveMqtt) return handshake_live(ctx, cx, parse_id(responder));
  const auto cy = ctx.load_credentials(responder);
  ManualClock clock(ctx.cfg.clock_start(SystemClock{}.now_ms()));
  auto ta = ctx.load_ta(clock);
  const Trace t = ebake_in_process(ctx, clock, *ta, cx, cy);
  ta->save(ctx.cfg.registry);  // keeps block-list state across commands
  print_trace(ctx, t, "ebake", cx.id.display(), cy.id.display());
  return t.failure ? kExitProtocol : kExitOk;
}

int cmd_ta_serve(Context& ctx, const std::vector<std::string>& pairs, std::uint64_t duration_ms,
                 std::uint64_t max_messages) {
  if (ctx.cfg.transport == TransportMode::kInProcess) {
    if (pairs.empty()) throw UsageError("in-process serve needs at least one --handshake INITIATOR:RESPONDER");
    ManualClock clock(ctx.cfg.clock_start(SystemClock{}.now_ms()));
    auto ta = ctx.load_ta(clock);
    int rc = kExitOk;
    for (const auto& p : pairs) {
      const auto colon = p.find(':');
      if (colon == std::string::npos) throw UsageError("--handshake expects INITIATOR:RESPONDER, got '" + p + "'");
      const auto cx = ctx.load_credentials(p.substr(0, colon));
      const auto cy = ctx.load_credentials(p.substr(colon + 1));
      const Trace t = ebake_in_process(ctx, clock, *ta, cx, cy);
      ctx.out << pad(cx.id.display() + " -> " + cy.id.display(), 28);
      if (t.failure) {
        ctx.out << "FAILED " << *t.failure << "\n";
        rc = kExitProtocol;
      } else {
        ctx.out << "initiator " << *t.initiator_fp << "  responder " << *t.responder_fp << "  topic " << *t.topic
                << "\n";
      }
    }
    ta->save(ctx.cfg.registry);
    return rc;
  }

  SystemClock clock;
  auto ta = ctx.load_ta(clock);
  transport::mqtt::Client bus(ctx.cfg.mqtt("ta"), &clock);
  transport::TaNode node(bus, *ta);
  std::uint64_t handled = 0;
  node.on_result = [&](const protocol::HandleResult& r) {
    ++handled;
    if (r.failure) {
      ctx.out << "refused: " << reason_name(r.failure->reason) << ": " << r.failure->detail << "\n";
    } else {
      ctx.out << "handled message, " << r.outbound.size() << " sent\n";
    }
    ctx.out.flush();
  };
  node.attach();
  ctx.out << "serving on " << ta->inbox_topic() << " via " << ctx.cfg.mqtt_host << ":" << ctx.cfg.mqtt_port << "\n";
  ctx.out.flush();
  SignalGuard guard;
  const auto budget = duration_ms ? std::chrono::milliseconds(duration_ms) : kForever;
  pump(bus, budget, [&] {
    ta->expire_pending();
    return max_messages && handled >= max_messages;
  });
  ta->save(ctx.cfg.registry);
  ctx.out << "stopped after " << handled << " message(s)\n";
  return kExitOk;
}

int cmd_device_listen(Context& ctx, const std::string& creds_ref, std::uint64_t duration_ms, std::uint64_t max_sessions) {
  if (ctx.cfg.transport != TransportMode::kLiveMqtt) throw UsageError("device listen needs --transport live-mqtt");
  SystemClock clock;
  const auto creds = ctx.load_credentials(creds_ref);
  protocol::Device dev(protocol::SecureElement(creds), ctx.cfg.protocol(), clock, *ctx.rng);
  transport::mqtt::Client bus(ctx.cfg.mqtt(file_stem(creds.id)), &clock);
  transport::DeviceNode node(bus, dev);
  std::uint64_t sessions = 0;
  node.on_established = [&](const protocol::SessionKey& sk) {
    ++sessions;
    ctx.out << "session with " << sk.peer.display() << "  topic " << sk.topic << "  SK fingerprint  "
            << sk.fingerprint() << "\n";
    ctx.out.flush();
  };
  node.on_failure = [&](const Failure& f) {
    ctx.out << "refused: " << reason_name(f.reason) << ": " << f.detail << "\n";
    ctx.out.flush();
  };
  node.attach();
  ctx.out << "listening on " << dev.inbox_topic() << "\n";
  ctx.out.flush();
  SignalGuard guard;
  const auto budget = duration_ms ? std::chrono::milliseconds(duration_ms) : kForever;
  pump(bus, budget, [&] {
    dev.expire();
    return max_sessions && sessions >= max_sessions;
  });
  return kExitOk;
}

int cmd_broker(Context& ctx, std::uint16_t port, std::uint64_t duration_ms) {
  transport::mqtt::LoopbackBroker broker(port);
  ctx.out << "loopback MQTT broker on 127.0.0.1:" << broker.port() << "\n";
  ctx.out.flush();
  SignalGuard guard;
  const auto deadline = std::chrono::steady_clock::now() + (duration_ms ? std::chrono::milliseconds(duration_ms) : kForever);
  while (!g_stop && std::chrono::steady_clock::now() < deadline) std::this_thread::sleep_for(50ms);
  broker.stop();
  const auto st = broker.stats();
  ctx.out << "stopped: " << st.connections << " connection(s), " << st.publishes_in << " publish in, "
          << st.publishes_out << " out\n";
  return kExitOk;
}

// ------------------------------------------------------- attack and bench

int cmd_attack(Context& ctx, const std::string& name, const std::string& scheme_s, std::optional<std::uint64_t> seed,
               const std::string& report_path, std::size_t flood) {
  const auto kind = adversary::parse_attack(name);
  if (!kind) throw UsageError("unknown attack '" + name + "' (trace, impersonate, mitm, dos)");
  const auto scheme = transport::parse_scheme(scheme_s);
  if (!scheme) throw UsageError("unknown scheme '" + scheme_s + "' (ebake or das)");
  adversary::AttackOptions o;
  o.seed = seed.value_or(ctx.cfg.seed.value_or(1));
  o.flood_count = flood;
  o.protocol = ctx.cfg.protocol();
  const auto report = adversary::run_attack(*kind, *scheme, o);
  const std::string text = report.to_json().dump(2) + "\n";
  if (report_path.empty() || report_path == "-") {
    ctx.out << text;
  } else {
    write_file_atomic(report_path, text, 0644);
    ctx.out << "attack " << report.attack << " vs " << transport::scheme_name(*scheme) << ": " << report.outcome()
            << " (report " << report_path << ")\n";
  }
  return kExitOk;
}

int cmd_bench(Context& ctx, const std::string& scheme_s, const std::string& output, bench::BenchOptions o) {
  const auto scheme = transport::parse_scheme(scheme_s);
  if (!scheme) throw UsageError("unknown scheme '" + scheme_s + "' (ebake or das)");
  o.seed = ctx.cfg.seed.value_or(1);
  const auto r = bench::run_bench(*scheme, o);
  if (output == "json") {
    ctx.out << r.to_json().dump(2) << "\n";
  } else {
    ctx.out << r.to_markdown();
  }
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"ebake"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"EBAKE key exchange toolkit: trusted authority, handshakes, attack scripts and benchmarks"};
  app.name("ebake");
  app.fallthrough();
  app.require_subcommand(1);
  app.allow_config_extras(CLI::config_extras_mode::error);

  Config cfg;
  std::string transport = "in-process";
  std::uint64_t seed = 0;
  std::uint64_t clock_start = 0;
  app.set_config("--config", "", "TOML-style config file (keys are the long option names)")->envname("EBAKE_CONFIG");
  app.add_option("--curve", cfg.curve, "Elliptic curve")->capture_default_str();
  app.add_option("--freshness-window-ms", cfg.freshness_window_ms, "Freshness window in ms")->capture_default_str();
  app.add_option("--block-duration-ms", cfg.block_duration_ms, "Block duration after 3 failures, ms")
      ->capture_default_str();
  app.add_option("--handshake-timeout-ms", cfg.handshake_timeout_ms, "Handshake timeout in ms (0: 4 windows)")
      ->capture_default_str();
  app.add_option("--transport", transport, "in-process or live-mqtt")
      ->check(CLI::IsMember({"in-process", "live-mqtt"}))
      ->capture_default_str();
  app.add_option("--mqtt-host", cfg.mqtt_host, "MQTT broker host")->capture_default_str();
  app.add_option("--mqtt-port", cfg.mqtt_port, "MQTT broker port")->capture_default_str();
  app.add_option("--mqtt-client-id", cfg.mqtt_client_id, "MQTT client id prefix")->capture_default_str();
  auto* seed_opt = app.add_option("--seed", seed, "Seed for a deterministic run");
  auto* clock_opt = app.add_option("--clock-start-ms", clock_start, "Scripted clock start (in-process)");
  app.add_option("--registry", cfg.registry, "TA registry file")->capture_default_str();
  app.add_option("--credentials-dir", cfg.credentials_dir, "Directory for device credential files")
      ->capture_default_str();

  std::function<int(Context&)> action;

  auto* ta = app.add_subcommand("ta", "Trusted authority: registry and handler loop");
  ta->require_subcommand(1);
  bool force = false;
  auto* ta_init = ta->add_subcommand("init", "Create an empty registry with a fresh K_dta");
  ta_init->add_flag("--force", force, "Replace an existing registry");
  ta_init->callback([&] { action = [&](Context& c) { cmd_ta_init(c, force); return static_cast<int>(kExitOk); }; });
  std::vector<std::string> reg_ids;
  auto* ta_reg = ta->add_subcommand("register", "Register devices and write their credential files");
  ta_reg->add_option("id", reg_ids, "Device id (label of up to 16 bytes or 32 hex characters)")->required();
  ta_reg->callback([&] { action = [&](Context& c) { cmd_ta_register(c, reg_ids); return static_cast<int>(kExitOk); }; });
  auto* ta_rot = ta->add_subcommand("rotate-kdta", "Start a new K_dta generation");
  ta_rot->callback([&] { action = [&](Context& c) { cmd_ta_rotate(c); return static_cast<int>(kExitOk); }; });
  auto* ta_list = ta->add_subcommand("list", "Show registered devices");
  ta_list->callback([&] { action = [&](Context& c) { cmd_ta_list(c); return static_cast<int>(kExitOk); }; });
  std::vector<std::string> pairs;
  std::uint64_t duration_ms = 0;
  std::uint64_t max_count = 0;
  auto* ta_serve = ta->add_subcommand("serve", "Run the TA handler loop");
  ta_serve->add_option("--handshake", pairs, "In-process: run INITIATOR:RESPONDER through this TA (repeatable)");
  ta_serve->add_option("--duration-ms", duration_ms, "Live: stop after this long (0: until signalled)");
  ta_serve->add_option("--max-messages", max_count, "Live: stop after this many messages");
  ta_serve->callback([&] { action = [&](Context& c) { return cmd_ta_serve(c, pairs, duration_ms, max_count); }; });

  std::string initiator, responder, scheme = "ebake";
  auto* hs = app.add_subcommand("handshake", "Run one handshake and print fingerprints, timings and counters");
  hs->add_option("--initiator", initiator, "Initiator credential file or device id")->required();
  hs->add_option("--responder", responder, "Responder device id")->required();
  hs->add_option("--scheme", scheme, "ebake or das")->capture_default_str();
  hs->callback([&] { action = [&](Context& c) { return cmd_handshake(c, initiator, responder, scheme); }; });

  auto* dev = app.add_subcommand("device", "Device-side commands");
  dev->require_subcommand(1);
  std::string creds_ref;
  auto* listen = dev->add_subcommand("listen", "Live: answer handshakes as responder");
  listen->add_option("--creds", creds_ref, "Credential file or device id")->required();
  listen->add_option("--duration-ms", duration_ms, "Stop after this long (0: until signalled)");
  listen->add_option("--max-sessions", max_count, "Stop after this many sessions");
  listen->callback([&] { action = [&](Context& c) { return cmd_device_listen(c, creds_ref, duration_ms, max_count); }; });

  std::uint16_t broker_port = 1883;
  auto* broker_cmd = app.add_subcommand("broker", "Run a loopback MQTT broker in the foreground (local demos)");
  broker_cmd->add_option("--port", broker_port, "Port on 127.0.0.1 (0: any free port)")->capture_default_str();
  broker_cmd->add_option("--duration-ms", duration_ms, "Stop after this long (0: until signalled)");
  broker_cmd->callback([&] { action = [&](Context& c) { return cmd_broker(c, broker_port, duration_ms); }; });

  auto* attack = app.add_subcommand("attack", "Adversary scripts");
  attack->require_subcommand(1);
  std::string attack_name, attack_scheme = "ebake", report;
  std::uint64_t attack_seed = 0;
  std::size_t flood = 100;
  auto* arun = attack->add_subcommand("run", "Run one attack and write its JSON report");
  arun->add_option("name", attack_name, "trace, impersonate, mitm or dos")->required();
  arun->add_option("--scheme", attack_scheme, "ebake or das")->capture_default_str();
  auto* aseed = arun->add_option("--seed", attack_seed, "Seed (defaults to the global seed, else 1)");
  arun->add_option("--report", report, "Report path ('-' or absent: stdout)");
  arun->add_option("--flood", flood, "Messages sent by the dos attack")->capture_default_str();
  arun->callback([&] {
    action = [&, aseed](Context& c) {
      return cmd_attack(c, attack_name, attack_scheme,
                        aseed->count() ? std::optional<std::uint64_t>(attack_seed) : std::nullopt, report, flood);
    };
  });
  auto* alist = attack->add_subcommand("list", "List attack names");
  alist->callback([&] {
    action = [&](Context& c) {
      c.out << "trace\nimpersonate\nmitm\ndos\n";
      return static_cast<int>(kExitOk);
    };
  });

  auto* bench_cmd = app.add_subcommand("bench", "Operation counts and timing");
  bench_cmd->require_subcommand(1);
  std::string bench_scheme = "ebake", output = "table";
  bench::BenchOptions bopts;
  auto* brun = bench_cmd->add_subcommand("run", "Count operations, time primitives, compare with the model");
  brun->add_option("--scheme", bench_scheme, "ebake or das")->capture_default_str();
  brun->add_option("--output", output, "table or json")->check(CLI::IsMember({"table", "json"}))->capture_default_str();
  brun->add_option("--iterations", bopts.iterations, "Calls per primitive (min 1000)")->capture_default_str();
  brun->add_option("--runs", bopts.runs, "Handshakes per round")->capture_default_str();
  brun->add_option("--rounds", bopts.rounds, "Alternating profile/handshake rounds")->capture_default_str();
  brun->callback([&] { action = [&](Context& c) { return cmd_bench(c, bench_scheme, output, bopts); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    cfg.transport = *parse_transport(transport);
    if (seed_opt->count()) cfg.seed = seed;
    if (clock_opt->count()) cfg.clock_start_ms = clock_start;
    cfg.validate();
    Context ctx(cfg, out, err);
    if (!action) throw UsageError("no command given");
    return action(ctx);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ProtocolFailure& e) {
    err << "handshake failed at " << e.what() << "\n";
    return kExitProtocol;
  } catch (const transport::mqtt::TransportError& e) {
    err << "transport failure: " << e.what() << "\n";
    return kExitTransport;
  } catch (const std::system_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const protocol::RegistrationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}

}  // namespace ebake::cli
