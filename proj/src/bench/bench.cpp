// Copyright 2026 The EBAKE Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "ebake/bench/bench.hpp"

#include <sched.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "ebake/crypto/cipher.hpp"
#include "ebake/protocol/handshake.hpp"

namespace ebake::bench {

using crypto::OpCounters;
using nlohmann::json;

namespace {

using WallClock = std::chrono::steady_clock;

std::string fmt(double v, int prec = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", prec, v);
  return buf;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

constexpr std::size_t kBatches = 10;

/// Median over batches of the per-call mean, which shrugs off scheduler
/// noise on shared hosts.
template <class F>
double mean_ms(std::size_t n, F&& f) {
  for (std::size_t i = 0; i < std::min<std::size_t>(n / 20 + 1, 50); ++i) f();
  const std::size_t per = std::max<std::size_t>(n / kBatches, 1);
  std::vector<double> batches;
  for (std::size_t b = 0; b < kBatches; ++b) {
    const auto start = WallClock::now();
    for (std::size_t i = 0; i < per; ++i) f();
    batches.push_back(std::chrono::duration<double, std::milli>(WallClock::now() - start).count() /
                      static_cast<double>(per));
  }
  return median(std::move(batches));
}

void pin_to_one_cpu() {
#ifdef __linux__
  cpu_set_t set;
  CPU_ZERO(&set);
  if (sched_getaffinity(0, sizeof set, &set) != 0) return;
  for (int cpu = 0; cpu < CPU_SETSIZE; ++cpu) {
    if (CPU_ISSET(cpu, &set)) {
      cpu_set_t one;
      CPU_ZERO(&one);
      CPU_SET(cpu, &one);
      (void)sched_setaffinity(0, sizeof one, &one);
      return;
    }
  }
#endif
}

json ops_json(const OpCounters& c) {
  return {{"sym", c.sym},           {"asym", c.asym},         {"hash", c.hash},
          {"xor", c.xor_ops},       {"point_mul", c.point_mul}, {"point_add", c.point_add}};
}

json profile_json(const TimingProfile& p) {
  return {{"t_h", p.t_h},     {"t_pa", p.t_pa},     {"t_pm", p.t_pm},
          {"t_sym", p.t_sym}, {"t_asym", p.t_asym}, {"t_xor", p.t_xor}};
}

std::string count_cell(std::uint64_t v) { return v == 0 ? "-" : std::to_string(v); }

}  // namespace

CountedRun run_counted_handshake(Scheme scheme, std::uint64_t seed) {
  ManualClock clock;
  crypto::DeterministicRandom rng(seed);
  CountedRun out;
  out.scheme = scheme;
  if (scheme == Scheme::kEbake) {
    transport::EbakeTestbed tb(clock, rng);
    const auto x = tb.add_device("bench-x");
    const auto y = tb.add_device("bench-y");
    (void)tb.initiate(x, y);
    tb.broker().run();
    out.entities = {{"D_x", tb.node(x).stats().ops}, {"TA", tb.ta_node().stats().ops}, {"D_y", tb.node(y).stats().ops}};
  } else {
    transport::DasTestbed tb(clock, rng);
    const auto x = tb.add_device("bench-x");
    const auto y = tb.add_device("bench-y");
    tb.initiate(x, y);
    tb.broker().run();
    out.entities = {{"D_x", tb.node(x).stats().ops}, {"D_y", tb.node(y).stats().ops}};
  }
  for (const auto& e : out.entities) out.total += e.ops;
  return out;
}

TimingProfile profile_primitives(std::size_t iterations, std::uint64_t seed) {
  iterations = std::max<std::size_t>(iterations, 1000);
  crypto::DeterministicRandom rng(seed);
  OpCounters sink;
  crypto::CountingScope scope(sink);
  TimingProfile p;
  p.iterations = iterations;

  const auto k = crypto::random_scalar(rng);
  const auto q = crypto::base_mult(crypto::random_scalar(rng));
  const auto q2 = crypto::base_mult(crypto::random_scalar(rng));
  p.t_pm = mean_ms(iterations, [&] { (void)crypto::scalar_mult(k, q); });
  p.t_pa = mean_ms(iterations, [&] { (void)crypto::point_add(q, q2); });

  // Hash input shaped like a verifier tag over a ciphertext.
  const crypto::Digest dp1 = crypto::Digest::from_bytes(rng.bytes(32));
  const Bytes ct = rng.bytes(160);
  const codec::Field fields[] = {crypto::to_field(dp1), codec::Field::timestamp(1), codec::Field::bytes(ct)};
  p.t_h = mean_ms(iterations, [&] { (void)crypto::hash("EBAKE-Pdx", fields); });

  const auto key = crypto::SymKey::generate(rng);
  const Bytes w_plain = rng.bytes(59);
  const Bytes w = crypto::sym_encrypt(key, w_plain, rng);
  const double enc_sym = mean_ms(iterations, [&] { (void)crypto::sym_encrypt(key, w_plain, rng); });
  const double dec_sym = mean_ms(iterations, [&] { (void)crypto::sym_decrypt(key, w); });
  p.t_sym = (enc_sym + dec_sym) / 2.0;

  const auto priv = crypto::random_scalar(rng);
  const auto pub = crypto::base_mult(priv);
  const Bytes z_plain = rng.bytes(94);
  const Bytes z = crypto::asym_encrypt(pub, z_plain, rng).serialize();
  const double enc_asym = mean_ms(iterations, [&] { (void)crypto::asym_encrypt(pub, z_plain, rng); });
  const double dec_asym = mean_ms(iterations, [&] { (void)crypto::asym_decrypt(priv, z); });
  p.t_asym = (enc_asym + dec_asym) / 2.0;

  const Bytes masked = rng.bytes(33);
  p.t_xor = mean_ms(iterations, [&] { (void)crypto::xor_mask(dp1, masked); });
  return p;
}

double predict_total(const TimingProfile& p, const OpCounters& c) {
  return static_cast<double>(c.sym) * p.t_sym + static_cast<double>(c.asym) * p.t_asym +
         static_cast<double>(c.point_mul) * p.t_pm + static_cast<double>(c.hash) * p.t_h +
         static_cast<double>(c.point_add) * p.t_pa;
}

std::string cost_formula(const OpCounters& c) {
  const std::pair<std::uint64_t, const char*> terms[] = {
      {c.sym, "T_sym"}, {c.asym, "T_asym"}, {c.point_mul, "T_pm"}, {c.hash, "T_h"}, {c.point_add, "T_pa"}};
  std::string out;
  for (const auto& [n, name] : terms) {
    if (n == 0) continue;
    if (!out.empty()) out += " + ";
    if (n != 1) out += std::to_string(n);
    out += name;
  }
  return out.empty() ? "0" : out;
}

ReferenceFigures reference_figures(Scheme scheme) {
  ReferenceFigures r;
  r.primitives = TimingProfile{0.043, 0.068, 12.226, 0.046, 12.268, 0.0, 0};
  if (scheme == Scheme::kEbake) {
    r.counts = OpCounters{2, 4, 11, 2, 0, 0};
    r.entity_formulas = {{"D_x", "T_sym + 2T_asym + 3T_h"}, {"TA", "T_sym + 5T_h"}, {"D_y", "2T_asym + 3T_h"}};
    r.total_formula = "2T_sym + 4T_asym + 11T_h";
    r.total_ms = 49.469;
  } else {
    r.counts = OpCounters{0, 0, 12, 0, 12, 0};
    r.entity_formulas = {{"D_x", "6T_pm + 6T_h + 2T_pa"}, {"D_y", "6T_pm + 6T_h + 2T_pa"}};
    r.total_formula = "12T_pm + 12T_h + 4T_pa";
    r.total_ms = 147.5;
  }
  return r;
}

double measure_handshake_compute(Scheme scheme, std::size_t runs, std::uint64_t seed) {
  runs = std::max<std::size_t>(runs, 1);
  const std::size_t warmup = std::min<std::size_t>(runs, 5);
  ManualClock clock;
  crypto::DeterministicRandom rng(seed);
  auto run = [&](auto& tb, auto total) {
    const auto x = tb.add_device("bench-x");
    const auto y = tb.add_device("bench-y");
    auto once = [&] {
      (void)tb.initiate(x, y);
      tb.broker().run();
    };
    for (std::size_t i = 0; i < warmup; ++i) once();
    const std::size_t per = std::max<std::size_t>(runs / kBatches, 1);
    std::vector<double> batches;
    for (std::size_t b = 0; b < kBatches; ++b) {
      const double before = total(tb);
      for (std::size_t i = 0; i < per; ++i) once();
      batches.push_back((total(tb) - before) / static_cast<double>(per));
    }
    return median(std::move(batches));
  };
  if (scheme == Scheme::kEbake) {
    transport::EbakeTestbed tb(clock, rng);
    return run(tb, [](transport::EbakeTestbed& t) {
      return t.node(0).stats().compute_ms + t.node(1).stats().compute_ms + t.ta_node().stats().compute_ms;
    });
  }
  transport::DasTestbed tb(clock, rng);
  return run(tb, [](transport::DasTestbed& t) { return t.node(0).stats().compute_ms + t.node(1).stats().compute_ms; });
}

double BenchReport::deviation() const {
  return predicted_ms > 0 ? std::fabs(measured_ms - predicted_ms) / predicted_ms : 0.0;
}

BenchReport run_bench(Scheme scheme, const BenchOptions& opts) {
  pin_to_one_cpu();
  BenchReport r;
  r.scheme = scheme;
  r.counted = run_counted_handshake(scheme, opts.seed);
  r.formula = cost_formula(r.counted.total);
  r.reference = reference_figures(scheme);
  r.runs = opts.runs;

  struct Round {
    TimingProfile profile;
    double predicted;
    double measured;
    double ratio() const { return measured / predicted; }
  };
  std::vector<Round> rounds;
  for (std::size_t i = 0; i < std::max<std::size_t>(opts.rounds, 1); ++i) {
    Round rd;
    rd.profile = profile_primitives(opts.iterations, opts.seed + i);
    rd.predicted = predict_total(rd.profile, r.counted.total);
    rd.measured = measure_handshake_compute(scheme, opts.runs, opts.seed + i);
    r.round_deviations.push_back(rd.ratio() - 1.0);
    rounds.push_back(rd);
  }
  std::sort(rounds.begin(), rounds.end(), [](const Round& a, const Round& b) { return a.ratio() < b.ratio(); });
  const Round& mid = rounds[rounds.size() / 2];
  r.profile = mid.profile;
  r.predicted_ms = mid.predicted;
  r.measured_ms = mid.measured;

  const double reference_formula_ms = predict_total(r.reference.primitives, r.counted.total);
  if (scheme == Scheme::kEbake) {
    OpCounters with_pm = r.counted.total;
    with_pm.point_mul = with_pm.asym;
    with_pm.asym = 0;
    r.notes.push_back("reference total " + fmt(r.reference.total_ms) + " ms equals the formula with T_pm in place of T_asym (" +
                      fmt(predict_total(r.reference.primitives, with_pm)) + " ms); with the reference T_asym it is " +
                      fmt(reference_formula_ms) + " ms");
  } else {
    r.notes.push_back("counted " + cost_formula(r.counted.total) + " differs from the reference " +
                      r.reference.total_formula + " and from the reference operation-count row (12 hash, 12 point_mul, 0 point_add): "
                      "certificate and signature checks add point operations");
  }
  return r;
}

json BenchReport::to_json() const {
  json entities = json::array();
  for (std::size_t i = 0; i < counted.entities.size(); ++i) {
    const auto& e = counted.entities[i];
    entities.push_back({{"entity", e.entity},
                        {"ops", ops_json(e.ops)},
                        {"formula", cost_formula(e.ops)},
                        {"reference_formula", i < reference.entity_formulas.size() ? reference.entity_formulas[i].second : ""}});
  }
  return {{"scheme", transport::scheme_name(scheme)},
          {"counters", {{"total", ops_json(counted.total)}, {"entities", std::move(entities)}}},
          {"formula", formula},
          {"profile_ms", profile_json(profile)},
          {"iterations", profile.iterations},
          {"predicted_ms", predicted_ms},
          {"measured_ms", measured_ms},
          {"measured_runs", runs},
          {"deviation", deviation()},
          {"round_deviations", round_deviations},
          {"reference",
           {{"counters", ops_json(reference.counts)},
            {"formula", reference.total_formula},
            {"total_ms", reference.total_ms},
            {"profile_ms", profile_json(reference.primitives)}}},
          {"notes", notes}};
}

std::string BenchReport::to_markdown() const {
  std::ostringstream o;
  const auto& t = counted.total;
  const auto& p = reference.counts;
  const char* model = scheme == Scheme::kEbake ? "D-TA-D" : "D-D";
  o << "### Operation counts (" << transport::scheme_name(scheme) << ")\n\n";
  o << "| Scheme | Model | OP1 sym | OP2 asym | OP3 hash | OP4 xor | OP5 pm | OP6 pa | reference |\n";
  o << "|---|---|---|---|---|---|---|---|---|\n";
  o << "| " << transport::scheme_name(scheme) << " | " << model << " | " << count_cell(t.sym) << " | "
    << count_cell(t.asym) << " | " << count_cell(t.hash) << " | " << count_cell(t.xor_ops) << " | "
    << count_cell(t.point_mul) << " | " << count_cell(t.point_add) << " | " << count_cell(p.sym) << " / "
    << count_cell(p.asym) << " / " << count_cell(p.hash) << " / " << count_cell(p.xor_ops) << " / "
    << count_cell(p.point_mul) << " / " << count_cell(p.point_add) << " |\n\n";

  o << "### Computation cost\n\n";
  o << "| Entity | Counted | reference |\n|---|---|---|\n";
  for (std::size_t i = 0; i < counted.entities.size(); ++i) {
    o << "| " << counted.entities[i].entity << " | " << cost_formula(counted.entities[i].ops) << " | "
      << (i < reference.entity_formulas.size() ? reference.entity_formulas[i].second : "-") << " |\n";
  }
  o << "| Total | " << formula << " | " << reference.total_formula << " |\n\n";

  o << "### Timing (ms)\n\n";
  o << "| Quantity | Measured | reference |\n|---|---|---|\n";
  const auto& q = reference.primitives;
  o << "| T_h | " << fmt(profile.t_h, 4) << " | " << fmt(q.t_h) << " |\n";
  o << "| T_pa | " << fmt(profile.t_pa, 4) << " | " << fmt(q.t_pa) << " |\n";
  o << "| T_pm | " << fmt(profile.t_pm, 4) << " | " << fmt(q.t_pm) << " |\n";
  o << "| T_sym | " << fmt(profile.t_sym, 4) << " | " << fmt(q.t_sym) << " |\n";
  o << "| T_asym | " << fmt(profile.t_asym, 4) << " | " << fmt(q.t_asym) << " |\n";
  o << "| Predicted total (" << formula << ") | " << fmt(predicted_ms, 4) << " | " << fmt(reference.total_ms) << " |\n";
  o << "| Measured handshake compute, " << runs << " runs, median of " << round_deviations.size() << " rounds | " << fmt(measured_ms, 4) << " | - |\n";
  o << "| Deviation from prediction | " << fmt(100.0 * deviation(), 1) << "% | - |\n";
  if (!notes.empty()) {
    o << "\n";
    for (const auto& n : notes) o << "- " << n << "\n";
  }
  return o.str();
}

}  // namespace ebake::bench
