// Copyright 2026 The EBAKE Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

#include "ebake/crypto/bytes.hpp"

namespace ebake {

/// 16-byte device identity.
struct DeviceId {
  std::array<std::uint8_t, 16> bytes{};

  static DeviceId from_bytes(ByteView b);
  /// 32 hex characters are parsed as raw bytes; anything else up to 16
  /// bytes is taken verbatim and zero padded. Throws std::invalid_argument
  /// for longer labels.
  static DeviceId from_label(std::string_view label);

  std::string hex() const { return to_hex(bytes); }
  /// Printable form: the label if it was a short ASCII label, else hex.
  std::string display() const;

  auto operator<=>(const DeviceId&) const = default;
};

}  // namespace ebake
