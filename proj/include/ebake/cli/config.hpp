// Copyright 2026 The EBAKE Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

#include "ebake/protocol/config.hpp"
#include "ebake/transport/mqtt.hpp"

namespace ebake::cli {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class TransportMode { kInProcess, kLiveMqtt };
std::string_view transport_name(TransportMode m);
std::optional<TransportMode> parse_transport(std::string_view s);

/// Settings shared by every command. Filled from the config file, the
/// EBAKE_CONFIG variable and flags, in increasing precedence.
struct Config {
  std::string curve = "P-256";
  std::uint64_t freshness_window_ms = 5'000;
  std::uint64_t block_duration_ms = 86'400'000;
  std::uint64_t handshake_timeout_ms = 0;  // 0: four freshness windows
  TransportMode transport = TransportMode::kInProcess;
  std::string mqtt_host = "127.0.0.1";
  std::uint16_t mqtt_port = 1883;
  std::string mqtt_client_id = "ebake";
  std::optional<std::uint64_t> seed;
  /// Start of the scripted clock used in-process. Defaults to a fixed epoch
  /// when a seed is set, else to the wall clock.
  std::optional<std::uint64_t> clock_start_ms;
  std::filesystem::path registry = "ebake-registry.json";
  std::filesystem::path credentials_dir = "credentials";

  /// Throws ConfigError naming the offending setting.
  void validate() const;
  protocol::ProtocolConfig protocol() const;
  transport::mqtt::ClientOptions mqtt(const std::string& role) const;
  std::uint64_t clock_start(std::uint64_t wall_now) const;
  std::filesystem::path credential_path(const std::string& label) const;
};

inline constexpr std::uint64_t kScriptedEpochMs = 1'700'000'000'000ull;

}  // namespace ebake::cli
