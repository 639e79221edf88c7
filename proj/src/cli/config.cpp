// Copyright 2026 The EBAKE Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "ebake/cli/config.hpp"

namespace ebake::cli {

std::string_view transport_name(TransportMode m) {
  return m == TransportMode::kInProcess ? "in-process" : "live-mqtt";
}

std::optional<TransportMode> parse_transport(std::string_view s) {
  if (s == "in-process") return TransportMode::kInProcess;
  if (s == "live-mqtt") return TransportMode::kLiveMqtt;
  return std::nullopt;
}

void Config::validate() const {
  if (curve != "P-256" && curve != "secp256r1" && curve != "prime256v1") {
    throw ConfigError("curve: only P-256 is supported, got '" + curve + "'");
  }
  // A zero window is accepted: every timestamp check then fails, which is
  // the documented way to exercise the freshness path.
  if (block_duration_ms < freshness_window_ms) {
    throw ConfigError("block-duration-ms (" + std::to_string(block_duration_ms) +
                      ") must be at least freshness-window-ms (" + std::to_string(freshness_window_ms) + ")");
  }
  if (transport == TransportMode::kLiveMqtt) {
    if (mqtt_host.empty()) throw ConfigError("mqtt-host is empty");
    if (mqtt_port == 0) throw ConfigError("mqtt-port must be non-zero");
  }
  if (registry.empty()) throw ConfigError("registry path is empty");
}

protocol::ProtocolConfig Config::protocol() const {
  protocol::ProtocolConfig p;
  p.freshness_window_ms = freshness_window_ms;
  p.block_duration_ms = block_duration_ms;
  p.timeout_ms = handshake_timeout_ms;
  return p;
}

transport::mqtt::ClientOptions Config::mqtt(const std::string& role) const {
  transport::mqtt::ClientOptions o;
  o.host = mqtt_host;
  o.port = mqtt_port;
  o.client_id = mqtt_client_id + "-" + role;
  return o;
}

std::uint64_t Config::clock_start(std::uint64_t wall_now) const {
  if (clock_start_ms) return *clock_start_ms;
  return seed ? kScriptedEpochMs : wall_now;
}

std::filesystem::path Config::credential_path(const std::string& label) const {
  return credentials_dir / (label + ".json");
}

}  // namespace ebake::cli
