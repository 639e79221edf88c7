// Copyright 2026 The EBAKE Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <sys/types.h>

namespace ebake {

/// Writes `text` to a sibling temporary file with permissions `mode`, syncs
/// it and renames it over `path`. A crash leaves either the old or the new
/// content, never a mix. Throws std::system_error.
void write_file_atomic(const std::filesystem::path& path, std::string_view text, mode_t mode = 0600);

/// Whole file as a string. Throws std::system_error if it cannot be opened.
std::string read_file(const std::filesystem::path& path);

}  // namespace ebake
