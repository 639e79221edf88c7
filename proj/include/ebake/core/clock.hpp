// Copyright 2026 The EBAKE Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <thread>

namespace ebake {

/// Millisecond wall clock, injectable so freshness and blocking rules can be
/// driven from scripts.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual std::uint64_t now_ms() const = 0;
  /// Blocks (or, for simulated clocks, jumps) until now_ms() >= t.
  virtual void wait_until(std::uint64_t t) = 0;
};

class SystemClock final : public Clock {
 public:
  std::uint64_t now_ms() const override {
    using namespace std::chrono;
    return static_cast<std::uint64_t>(
        duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count());
  }
  void wait_until(std::uint64_t t) override {
    const std::uint64_t now = now_ms();
    if (t > now) std::this_thread::sleep_for(std::chrono::milliseconds(t - now));
  }
};

class ManualClock final : public Clock {
 public:
  explicit ManualClock(std::uint64_t start_ms = 1'700'000'000'000ull) : now_(start_ms) {}
  std::uint64_t now_ms() const override { return now_.load(); }
  void wait_until(std::uint64_t t) override {
    std::uint64_t cur = now_.load();
    while (t > cur && !now_.compare_exchange_weak(cur, t)) {
    }
  }
  void set(std::uint64_t t) { now_.store(t); }
  void advance(std::uint64_t delta) { now_.fetch_add(delta); }

 private:
  std::atomic<std::uint64_t> now_;
};

/// Freshness rule shared by every receiver: a timestamp is accepted iff the
/// window is open, its age is at most `window` and it is at most `window`
/// in the future. A zero window rejects everything.
inline bool is_fresh(std::uint64_t ts, std::uint64_t now, std::uint64_t window) {
  if (window == 0) return false;
  if (ts > now) return ts - now <= window;
  return now - ts <= window;
}

}  // namespace ebake
