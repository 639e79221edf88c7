// Copyright 2026 The EBAKE Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "ebake/das/das.hpp"

namespace ebake::das {

using codec::Field;
using codec::FieldReader;
using codec::FieldType;
using codec::MsgType;
using crypto::Point;
using crypto::Scalar;

namespace {

Scalar read_scalar(FieldReader& r) { return Scalar::from_bytes_checked(r.next(FieldType::kScalar)); }
Point read_point(FieldReader& r) { return Point::decompress(r.next(FieldType::kPoint)); }
DeviceId read_id(FieldReader& r) { return DeviceId::from_bytes(r.next(FieldType::kId)); }

// Decoding rejects malformed scalars and points as parse errors.
template <class F>
auto parse_guard(F&& f) {
  try {
    return f();
  } catch (const std::invalid_argument& e) {
    throw codec::ParseError(e.what());
  }
}

}  // namespace

Bytes SystemParams::serialize() const {
  const Field f[] = {Field::string(curve), crypto::to_field(pub_ta), Field::string(hash_id)};
  return codec::encode_fields(f);
}

SystemParams SystemParams::parse(ByteView raw) {
  return parse_guard([&] {
    const auto fields = codec::decode_fields(raw);
    FieldReader r(fields);
    SystemParams p;
    p.curve = r.next_string();
    p.pub_ta = read_point(r);
    p.hash_id = r.next_string();
    r.finish();
    return p;
  });
}

Authority::Authority(crypto::RandomSource& rng) : Authority(crypto::random_scalar(rng), rng) {}

Authority::Authority(const Scalar& pr_ta, crypto::RandomSource& rng) : rng_(rng), pr_ta_(pr_ta) {
  params_.pub_ta = crypto::detail::mul_base(pr_ta_);
}

DeviceState Authority::register_device(const DeviceId& id) {
  if (ids_.contains(id)) throw RegistrationError("device already registered: " + id.display());
  const Scalar pr = crypto::random_scalar(rng_);
  const Scalar l = crypto::random_scalar(rng_);
  const Scalar secret = pr.add(l);
  const Point a = crypto::detail::mul_base(secret);
  const Scalar c = pr_ta_.add(secret.mul(cert_challenge(id, a)));
  ids_.insert(id);
  return DeviceState{id, pr, a, c, crypto::detail::mul_base(pr), params_};
}

DeviceState Authority::add_device(const DeviceId& replacement, std::optional<DeviceId> old) {
  DeviceState st = register_device(replacement);
  if (old) ids_.erase(*old);
  return st;
}

Bytes Msg1::to_payload() const {
  const Field f[] = {Field::timestamp(ts_x), Field::id(id_x.bytes), crypto::to_field(c_x), crypto::to_field(z_x),
                     crypto::to_field(a_x), crypto::to_field(pub_x), crypto::to_field(r_x)};
  return codec::encode_fields(f);
}

Msg1 Msg1::from_payload(ByteView payload) {
  return parse_guard([&] {
    const auto fields = codec::decode_payload(MsgType::kDasMsg1, payload);
    FieldReader r(fields);
    const auto ts = r.next_timestamp();
    const auto id = read_id(r);
    const auto c = read_scalar(r);
    const auto z = read_scalar(r);
    const auto a = read_point(r);
    const auto pub = read_point(r);
    const auto rx = read_point(r);
    r.finish();
    return Msg1{ts, id, c, z, a, pub, rx};
  });
}

Bytes Msg2::to_payload() const {
  const Field f[] = {Field::id(id_y.bytes),  Field::timestamp(ts_y), crypto::to_field(a_y),
                     crypto::to_field(c_y),  crypto::to_field(z_y),  crypto::to_field(skv),
                     crypto::to_field(pub_y), crypto::to_field(r_y)};
  return codec::encode_fields(f);
}

Msg2 Msg2::from_payload(ByteView payload) {
  return parse_guard([&] {
    const auto fields = codec::decode_payload(MsgType::kDasMsg2, payload);
    FieldReader r(fields);
    const auto id = read_id(r);
    const auto ts = r.next_timestamp();
    const auto a = read_point(r);
    const auto c = read_scalar(r);
    const auto z = read_scalar(r);
    const auto v = crypto::Digest::from_bytes(r.next(FieldType::kDigest));
    const auto pub = read_point(r);
    const auto ry = read_point(r);
    r.finish();
    return Msg2{id, ts, a, c, z, v, pub, ry};
  });
}

Bytes Msg3::to_payload() const {
  const Field f[] = {crypto::to_field(skv), Field::timestamp(ts_x)};
  return codec::encode_fields(f);
}

Msg3 Msg3::from_payload(ByteView payload) {
  const auto fields = codec::decode_payload(MsgType::kDasMsg3, payload);
  FieldReader r(fields);
  Msg3 m;
  m.skv = crypto::Digest::from_bytes(r.next(FieldType::kDigest));
  m.ts_x = r.next_timestamp();
  r.finish();
  return m;
}

Scalar cert_challenge(const DeviceId& id, const Point& a) {
  return Scalar::reduce(crypto::hash(kTagCert, {Field::id(id.bytes), crypto::to_field(a)}).bytes);
}

Scalar z_challenge(const Point& a, const Scalar& c, const Point& r, const Point& pub, std::uint64_t ts) {
  return Scalar::reduce(crypto::hash(kTagZ, {crypto::to_field(a), crypto::to_field(c), crypto::to_field(r),
                                             crypto::to_field(pub), Field::timestamp(ts)})
                            .bytes);
}

Scalar sign_z(const Scalar& c, const Scalar& h, const Scalar& r, const Scalar& pr) {
  return c.add(h.mul(r.add(pr)));
}

bool certificate_holds(const SystemParams& params, const DeviceId& id, const Point& a, const Scalar& c) {
  const Point u = crypto::point_add(params.pub_ta, crypto::scalar_mult(cert_challenge(id, a), a));
  return u == crypto::base_mult(c);
}

namespace {

// W = c.P + h(...).(R + Pub), reusing a precomputed c.P.
bool z_holds_with(const Point& cp, const Point& a, const Scalar& c, const Scalar& z, const Point& r,
                  const Point& pub, std::uint64_t ts) {
  const Scalar h = z_challenge(a, c, r, pub, ts);
  const Point w = crypto::point_add(cp, crypto::scalar_mult(h, crypto::point_add(r, pub)));
  return w == crypto::base_mult(z);
}

// Certificate and z checks with c.P computed once, as a device would.
std::optional<Failure> verify_peer(const SystemParams& params, const DeviceId& id, const Point& a, const Scalar& c,
                                   const Scalar& z, const Point& r, const Point& pub, std::uint64_t ts) {
  const Point cp = crypto::base_mult(c);
  const Point u = crypto::point_add(params.pub_ta, crypto::scalar_mult(cert_challenge(id, a), a));
  if (!(u == cp)) return Failure{FailureReason::kVerifierMismatch, "certificate check U != c.P"};
  if (!z_holds_with(cp, a, c, z, r, pub, ts)) {
    return Failure{FailureReason::kVerifierMismatch, "signature check W != z.P"};
  }
  return std::nullopt;
}

}  // namespace

bool z_holds(const Point& a, const Scalar& c, const Scalar& z, const Point& r, const Point& pub, std::uint64_t ts) {
  return z_holds_with(crypto::base_mult(c), a, c, z, r, pub, ts);
}

crypto::Digest session_key(const Point& b, const Point& k, std::uint64_t ts_y, std::uint64_t ts_x,
                           const DeviceId& id_x, const DeviceId& id_y) {
  return crypto::hash(kTagSk, {crypto::to_field(b), crypto::to_field(k), Field::timestamp(ts_y),
                               Field::timestamp(ts_x), Field::id(id_x.bytes), Field::id(id_y.bytes)});
}

crypto::Digest skv(const crypto::Digest& sk, std::uint64_t ts) {
  return crypto::hash(kTagSkv, {crypto::to_field(sk), Field::timestamp(ts)});
}

Msg1Result das_msg1(const DeviceState& dx, std::uint64_t now, crypto::RandomSource& rng) {
  const Scalar r = crypto::random_scalar(rng);
  const Point big_r = crypto::base_mult(r);
  const Scalar h = z_challenge(dx.a, dx.c, big_r, dx.pub, now);
  Msg1 m{now, dx.id, dx.c, sign_z(dx.c, h, r, dx.pr), dx.a, dx.pub, big_r};
  return Msg1Result{m, InitiatorPending{r, m}};
}

Outcome<Msg2Result> das_msg2(const DeviceState& dy, const Msg1& m1, std::uint64_t now, std::uint64_t window,
                             crypto::RandomSource& rng) {
  if (!is_fresh(m1.ts_x, now, window)) return Failure{FailureReason::kStaleTimestamp, "TS_x outside window"};
  if (auto f = verify_peer(dy.params, m1.id_x, m1.a_x, m1.c_x, m1.z_x, m1.r_x, m1.pub_x, m1.ts_x)) return *f;

  const Scalar r = crypto::random_scalar(rng);
  const Point big_r = crypto::base_mult(r);
  const std::uint64_t ts_y = now;
  const Scalar z = sign_z(dy.c, z_challenge(dy.a, dy.c, big_r, dy.pub, ts_y), r, dy.pr);
  const Point k = crypto::scalar_mult(dy.pr, m1.pub_x);
  const Point b = crypto::scalar_mult(r, m1.r_x);
  const crypto::Digest sk = session_key(b, k, ts_y, m1.ts_x, m1.id_x, dy.id);
  Msg2 m2{dy.id, ts_y, dy.a, dy.c, z, skv(sk, ts_y), dy.pub, big_r};
  return Msg2Result{m2, ResponderPending{sk, m1.id_x, ts_y}};
}

Outcome<Msg3Result> das_msg3(const DeviceState& dx, const InitiatorPending& pending, const Msg2& m2,
                             std::uint64_t now, std::uint64_t window) {
  if (!is_fresh(m2.ts_y, now, window)) return Failure{FailureReason::kStaleTimestamp, "TS_y outside window"};
  if (auto f = verify_peer(dx.params, m2.id_y, m2.a_y, m2.c_y, m2.z_y, m2.r_y, m2.pub_y, m2.ts_y)) return *f;
  const Point k = crypto::scalar_mult(dx.pr, m2.pub_y);
  const Point b = crypto::scalar_mult(pending.r_x, m2.r_y);
  const crypto::Digest sk = session_key(b, k, m2.ts_y, pending.sent.ts_x, dx.id, m2.id_y);
  if (!(skv(sk, m2.ts_y) == m2.skv)) return Failure{FailureReason::kVerifierMismatch, "SKV_xy does not verify"};
  const std::uint64_t ts = now;
  return Msg3Result{Msg3{skv(sk, ts), ts}, sk};
}

Outcome<crypto::Digest> das_msg3_verify(const ResponderPending& pending, const Msg3& m3, std::uint64_t now,
                                        std::uint64_t window) {
  if (!is_fresh(m3.ts_x, now, window)) return Failure{FailureReason::kStaleTimestamp, "TS'_x outside window"};
  if (!(skv(pending.sk, m3.ts_x) == m3.skv)) return Failure{FailureReason::kVerifierMismatch, "SKV_yx does not verify"};
  return pending.sk;
}

std::string device_topic(const DeviceId& id) { return "das/dev/" + id.hex() + "/inbox"; }

Device::Device(DeviceState state, std::uint64_t window_ms, const Clock& clock, crypto::RandomSource& rng)
    : state_(std::move(state)), window_(window_ms), clock_(clock), rng_(rng) {}

Outgoing Device::initiate(const DeviceId& peer) {
  codec::CorrelationId corr{};
  rng_.fill(corr);
  auto r = das_msg1(state_, clock_.now_ms(), rng_);
  initiating_.insert_or_assign(corr, r.pending);
  return Outgoing{device_topic(peer), codec::Envelope{MsgType::kDasMsg1, corr, topic(), r.msg.to_payload()}};
}

HandleResult Device::handle(ByteView raw) {
  HandleResult out;
  auto fail = [&](Failure f) {
    failures_.push_back(f);
    out.failure = std::move(f);
  };
  codec::Envelope env;
  try {
    env = codec::decode_envelope(raw);
  } catch (const codec::ParseError& e) {
    fail({FailureReason::kMalformed, e.what()});
    return out;
  }
  const std::uint64_t now = clock_.now_ms();
  try {
    switch (env.type) {
      case MsgType::kDasMsg1: {
        ++verifications_;
        auto r = das_msg2(state_, Msg1::from_payload(env.payload), now, window_, rng_);
        if (!r) {
          fail(r.failure());
          break;
        }
        responding_.insert_or_assign(env.correlation, r.value().pending);
        responder_keys_.insert_or_assign(env.correlation, r.value().pending.sk);
        out.outbound.push_back({env.sender_hint, codec::Envelope{MsgType::kDasMsg2, env.correlation, topic(),
                                                                 r.value().msg.to_payload()}});
        break;
      }
      case MsgType::kDasMsg2: {
        auto it = initiating_.find(env.correlation);
        if (it == initiating_.end()) {
          fail({FailureReason::kMissingSession, "no pending initiator session"});
          break;
        }
        ++verifications_;
        const auto m2 = Msg2::from_payload(env.payload);
        auto r = das_msg3(state_, it->second, m2, now, window_);
        if (!r) {
          fail(r.failure());
          break;
        }
        initiating_.erase(it);
        Established e{r.value().sk, m2.id_y, env.correlation};
        sessions_.push_back(e);
        out.established = e;
        out.outbound.push_back({env.sender_hint, codec::Envelope{MsgType::kDasMsg3, env.correlation, topic(),
                                                                 r.value().msg.to_payload()}});
        break;
      }
      case MsgType::kDasMsg3: {
        auto it = responding_.find(env.correlation);
        if (it == responding_.end()) {
          fail({FailureReason::kMissingSession, "no pending responder session"});
          break;
        }
        ++verifications_;
        auto r = das_msg3_verify(it->second, Msg3::from_payload(env.payload), now, window_);
        if (!r) {
          fail(r.failure());
          break;
        }
        Established e{r.value(), it->second.peer, env.correlation};
        responding_.erase(it);
        sessions_.push_back(e);
        out.established = e;
        break;
      }
      default:
        fail({FailureReason::kMalformed, "unexpected message type"});
    }
  } catch (const codec::ParseError& e) {
    fail({FailureReason::kMalformed, e.what()});
  }
  return out;
}

std::optional<crypto::Digest> Device::responder_key(const codec::CorrelationId& corr) const {
  auto it = responder_keys_.find(corr);
  if (it == responder_keys_.end()) return std::nullopt;
  return it->second;
}

}  // namespace ebake::das
