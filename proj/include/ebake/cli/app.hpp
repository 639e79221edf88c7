// Copyright 2026 The EBAKE Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace ebake::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitProtocol = 2,
  kExitTransport = 3,
};

/// Runs one `ebake` command. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ebake::cli
