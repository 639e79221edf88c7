// Copyright 2026 The EBAKE Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

// Operation counts per entity, primitive timings and the linear cost model
// that combines them.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ebake/crypto/counters.hpp"
#include "ebake/transport/testbed.hpp"
#include "json.hpp"

namespace ebake::bench {

using transport::Scheme;

struct EntityOps {
  std::string entity;
  crypto::OpCounters ops;
};

struct CountedRun {
  Scheme scheme = Scheme::kEbake;
  std::vector<EntityOps> entities;
  crypto::OpCounters total;
};

/// One honest handshake on a fresh deployment, counted per entity.
CountedRun run_counted_handshake(Scheme scheme, std::uint64_t seed = 1);

/// Mean milliseconds per primitive.
struct TimingProfile {
  double t_h = 0.0;
  double t_pa = 0.0;
  double t_pm = 0.0;
  double t_sym = 0.0;
  double t_asym = 0.0;
  double t_xor = 0.0;
  std::size_t iterations = 0;
};

/// Times each primitive over `iterations` calls (at least 1000) after a
/// warm-up, on inputs shaped like the handshake's. Each figure is the median
/// of ten batch means.
TimingProfile profile_primitives(std::size_t iterations = 1000, std::uint64_t seed = 1);

/// Sum of count x primitive time. XOR is left out, as in the cost tables.
double predict_total(const TimingProfile& p, const crypto::OpCounters& c);

/// Symbolic cost, e.g. "2T_sym + 4T_asym + 11T_h".
std::string cost_formula(const crypto::OpCounters& c);

struct ReferenceFigures {
  crypto::OpCounters counts;
  std::vector<std::pair<std::string, std::string>> entity_formulas;
  std::string total_formula;
  double total_ms = 0.0;
  TimingProfile primitives;
};
ReferenceFigures reference_figures(Scheme scheme);

/// Wall time per handshake spent inside the protocol state machines (all
/// entities), excluding the broker. Median of batch means over `runs`.
double measure_handshake_compute(Scheme scheme, std::size_t runs, std::uint64_t seed = 1);

struct BenchOptions {
  std::size_t iterations = 1000;
  std::size_t runs = 200;
  // Profile and handshake timing alternate this many times; the round with
  // the median measured/predicted ratio is reported.
  std::size_t rounds = 5;
  std::uint64_t seed = 1;
};

struct BenchReport {
  Scheme scheme = Scheme::kEbake;
  CountedRun counted;
  TimingProfile profile;
  std::string formula;
  double predicted_ms = 0.0;
  double measured_ms = 0.0;
  std::size_t runs = 0;
  std::vector<double> round_deviations;  // signed, one per round
  ReferenceFigures reference;
  std::vector<std::string> notes;

  /// |measured - predicted| / predicted.
  double deviation() const;
  nlohmann::json to_json() const;
  std::string to_markdown() const;
};

BenchReport run_bench(Scheme scheme, const BenchOptions& opts = {});

}  // namespace ebake::bench
