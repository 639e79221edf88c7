// Copyright 2026 The EBAKE Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

// Certificate-based device-to-device key agreement used as the baseline and
// attack target. Implemented as published, weaknesses included: identities
// travel in clear, nothing is blocked, and message 2 does not bind Pub/R to
// the certificate.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "ebake/codec/envelope.hpp"
#include "ebake/core/clock.hpp"
#include "ebake/core/identity.hpp"
#include "ebake/core/outcome.hpp"
#include "ebake/crypto/ec.hpp"
#include "ebake/crypto/hash.hpp"
#include "ebake/crypto/random.hpp"

namespace ebake::das {

inline constexpr std::string_view kTagCert = "DAS-cert";
inline constexpr std::string_view kTagZ = "DAS-z";
inline constexpr std::string_view kTagSk = "DAS-SK";
inline constexpr std::string_view kTagSkv = "DAS-SKV";

struct SystemParams {
  std::string curve = "P-256";
  crypto::Point pub_ta;
  std::string hash_id = "SHA-256";

  Bytes serialize() const;
  static SystemParams parse(ByteView raw);
  bool operator==(const SystemParams&) const = default;
};

/// Everything loaded into a device's memory at registration. A physical
/// capture yields exactly this.
struct DeviceState {
  DeviceId id;
  crypto::Scalar pr;
  crypto::Point a;
  crypto::Scalar c;
  crypto::Point pub;
  SystemParams params;
};

class RegistrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Authority {
 public:
  explicit Authority(crypto::RandomSource& rng);
  /// Fixed TA key, for reproducible deployments and tests.
  Authority(const crypto::Scalar& pr_ta, crypto::RandomSource& rng);

  const SystemParams& params() const { return params_; }
  const crypto::Point& pub_ta() const { return params_.pub_ta; }

  DeviceState register_device(const DeviceId& id);
  /// Dynamic addition: provisions `replacement` and retires `old` if given.
  DeviceState add_device(const DeviceId& replacement, std::optional<DeviceId> old = std::nullopt);
  bool is_registered(const DeviceId& id) const { return ids_.contains(id); }

 private:
  crypto::RandomSource& rng_;
  crypto::Scalar pr_ta_;
  SystemParams params_;
  std::set<DeviceId> ids_;
};

struct Msg1 {
  std::uint64_t ts_x = 0;
  DeviceId id_x;
  crypto::Scalar c_x;
  crypto::Scalar z_x;
  crypto::Point a_x;
  crypto::Point pub_x;
  crypto::Point r_x;

  Bytes to_payload() const;
  static Msg1 from_payload(ByteView payload);
};

struct Msg2 {
  DeviceId id_y;
  std::uint64_t ts_y = 0;
  crypto::Point a_y;
  crypto::Scalar c_y;
  crypto::Scalar z_y;
  crypto::Digest skv;
  crypto::Point pub_y;
  crypto::Point r_y;

  Bytes to_payload() const;
  static Msg2 from_payload(ByteView payload);
};

struct Msg3 {
  crypto::Digest skv;
  std::uint64_t ts_x = 0;

  Bytes to_payload() const;
  static Msg3 from_payload(ByteView payload);
};

// Algebra shared by honest parties and the attack scripts.

/// h(ID || A) as a scalar.
crypto::Scalar cert_challenge(const DeviceId& id, const crypto::Point& a);
/// h(A || c || R || Pub || TS) as a scalar. Both sides use this order.
crypto::Scalar z_challenge(const crypto::Point& a, const crypto::Scalar& c, const crypto::Point& r,
                           const crypto::Point& pub, std::uint64_t ts);
/// c + h(...)(r + pr) mod n.
crypto::Scalar sign_z(const crypto::Scalar& c, const crypto::Scalar& h, const crypto::Scalar& r,
                      const crypto::Scalar& pr);
/// c.P == Pub_TA + h(ID || A).A
bool certificate_holds(const SystemParams& params, const DeviceId& id, const crypto::Point& a,
                       const crypto::Scalar& c);
/// z.P == c.P + h(...).(R + Pub)
bool z_holds(const crypto::Point& a, const crypto::Scalar& c, const crypto::Scalar& z, const crypto::Point& r,
             const crypto::Point& pub, std::uint64_t ts);
/// h(B || K || TS_y || TS_x || ID_x || ID_y), one order for both sides.
crypto::Digest session_key(const crypto::Point& b, const crypto::Point& k, std::uint64_t ts_y,
                           std::uint64_t ts_x, const DeviceId& id_x, const DeviceId& id_y);
crypto::Digest skv(const crypto::Digest& sk, std::uint64_t ts);

struct InitiatorPending {
  crypto::Scalar r_x;
  Msg1 sent;
};

struct Msg1Result {
  Msg1 msg;
  InitiatorPending pending;
};

struct ResponderPending {
  crypto::Digest sk;
  DeviceId peer;
  std::uint64_t ts_y = 0;
};

struct Msg2Result {
  Msg2 msg;
  ResponderPending pending;
};

struct Msg3Result {
  Msg3 msg;
  crypto::Digest sk;
};

Msg1Result das_msg1(const DeviceState& dx, std::uint64_t now, crypto::RandomSource& rng);
Outcome<Msg2Result> das_msg2(const DeviceState& dy, const Msg1& m1, std::uint64_t now, std::uint64_t window,
                             crypto::RandomSource& rng);
Outcome<Msg3Result> das_msg3(const DeviceState& dx, const InitiatorPending& pending, const Msg2& m2,
                             std::uint64_t now, std::uint64_t window);
/// Returns the session key on acceptance.
Outcome<crypto::Digest> das_msg3_verify(const ResponderPending& pending, const Msg3& m3, std::uint64_t now,
                                        std::uint64_t window);

std::string device_topic(const DeviceId& id);

struct Established {
  crypto::Digest key;
  DeviceId peer;
  codec::CorrelationId correlation{};
};

struct Outgoing {
  std::string topic;
  codec::Envelope envelope;
};

struct HandleResult {
  std::vector<Outgoing> outbound;
  std::optional<Failure> failure;
  std::optional<Established> established;
};

/// Message-driven wrapper. Every inbound message is fully verified; there is
/// no blocking.
class Device {
 public:
  Device(DeviceState state, std::uint64_t window_ms, const Clock& clock, crypto::RandomSource& rng);

  const DeviceId& id() const { return state_.id; }
  std::string topic() const { return device_topic(state_.id); }
  const DeviceState& state() const { return state_; }

  Outgoing initiate(const DeviceId& peer);
  HandleResult handle(ByteView raw);

  const std::vector<Established>& sessions() const { return sessions_; }
  const std::vector<Failure>& failures() const { return failures_; }
  std::uint64_t verifications() const { return verifications_; }
  /// Key derived as responder for `corr` while awaiting Msg3, or after it.
  std::optional<crypto::Digest> responder_key(const codec::CorrelationId& corr) const;

 private:
  DeviceState state_;
  std::uint64_t window_;
  const Clock& clock_;
  crypto::RandomSource& rng_;
  std::map<codec::CorrelationId, InitiatorPending> initiating_;
  std::map<codec::CorrelationId, ResponderPending> responding_;
  std::map<codec::CorrelationId, crypto::Digest> responder_keys_;
  std::vector<Established> sessions_;
  std::vector<Failure> failures_;
  std::uint64_t verifications_ = 0;
};

}  // namespace ebake::das
