// Copyright 2026 The EBAKE Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ebake {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

std::string to_hex(ByteView data);

/// Parses lower- or upper-case hex. Throws std::invalid_argument on odd
/// length or a non-hex character.
Bytes from_hex(std::string_view hex);

/// Constant-time equality. Inputs of different length compare unequal
/// (the length itself is not secret).
bool ct_equal(ByteView a, ByteView b);

inline ByteView as_view(std::string_view s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

template <std::size_t N>
Bytes to_bytes(const std::array<std::uint8_t, N>& a) {
  return Bytes(a.begin(), a.end());
}

/// True if `needle` occurs anywhere in `haystack`.
bool contains(ByteView haystack, ByteView needle);

}  // namespace ebake
