// Copyright 2026 The EBAKE Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>

namespace ebake {

enum class FailureReason {
  kStaleTimestamp,
  kAuthenticationFailed,  // AEAD tag or hybrid decryption failure
  kVerifierMismatch,      // recomputed verifier tag differs
  kUnknownPeer,
  kPeerBlocked,
  kMissingSession,
  kIdentityMismatch,
  kMalformed,
  kKeyGenerationMismatch,
  kReplay,
  kTimeout,
};

std::string_view reason_name(FailureReason r);

struct Failure {
  FailureReason reason;
  std::string detail;
};

/// Value or protocol failure. Verification failures are expected outcomes on
/// an adversarial channel, so they are returned rather than thrown.
template <class T>
class Outcome {
 public:
  Outcome(T value) : v_(std::move(value)) {}  // NOLINT(google-explicit-constructor)
  Outcome(Failure f) : v_(std::move(f)) {}    // NOLINT(google-explicit-constructor)

  bool ok() const { return std::holds_alternative<T>(v_); }
  explicit operator bool() const { return ok(); }

  T& value() {
    if (!ok()) throw std::logic_error("Outcome holds a failure: " + failure().detail);
    return std::get<T>(v_);
  }
  const T& value() const {
    if (!ok()) throw std::logic_error("Outcome holds a failure: " + failure().detail);
    return std::get<T>(v_);
  }
  const Failure& failure() const { return std::get<Failure>(v_); }
  FailureReason reason() const { return failure().reason; }

 private:
  std::variant<T, Failure> v_;
};

inline std::string_view reason_name(FailureReason r) {
  switch (r) {
    case FailureReason::kStaleTimestamp: return "stale-timestamp";
    case FailureReason::kAuthenticationFailed: return "authentication-failed";
    case FailureReason::kVerifierMismatch: return "verifier-mismatch";
    case FailureReason::kUnknownPeer: return "unknown-peer";
    case FailureReason::kPeerBlocked: return "peer-blocked";
    case FailureReason::kMissingSession: return "missing-session";
    case FailureReason::kIdentityMismatch: return "identity-mismatch";
    case FailureReason::kMalformed: return "malformed";
    case FailureReason::kKeyGenerationMismatch: return "key-generation-mismatch";
    case FailureReason::kReplay: return "replay";
    case FailureReason::kTimeout: return "timeout";
  }
  return "unknown";
}

}  // namespace ebake
