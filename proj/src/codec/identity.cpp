// Copyright 2026 The EBAKE Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "ebake/core/identity.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

namespace ebake {

DeviceId DeviceId::from_bytes(ByteView b) {
  if (b.size() != 16) throw std::invalid_argument("device identity must be 16 bytes");
  DeviceId id;
  std::copy(b.begin(), b.end(), id.bytes.begin());
  return id;
}

DeviceId DeviceId::from_label(std::string_view label) {
  if (label.size() == 32 &&
      std::all_of(label.begin(), label.end(), [](unsigned char c) { return std::isxdigit(c); })) {
    return from_bytes(from_hex(label));
  }
  if (label.empty() || label.size() > 16) {
    throw std::invalid_argument("device label must be 1-16 bytes or 32 hex characters");
  }
  DeviceId id;
  std::copy(label.begin(), label.end(), id.bytes.begin());
  return id;
}

std::string DeviceId::display() const {
  std::size_t len = 0;
  while (len < bytes.size() && bytes[len] != 0) ++len;
  const bool padded = std::all_of(bytes.begin() + static_cast<std::ptrdiff_t>(len), bytes.end(),
                                  [](std::uint8_t b) { return b == 0; });
  const bool printable = len > 0 && std::all_of(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(len),
                                                [](std::uint8_t b) { return b >= 0x21 && b < 0x7f; });
  if (padded && printable) return std::string(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(len));
  return hex();
}

}  // namespace ebake
