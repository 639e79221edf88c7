// Copyright 2026 The EBAKE Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#include <iostream>

#include "ebake/cli/app.hpp"

int main(int argc, char** argv) { return ebake::cli::run(argc, argv, std::cout, std::cerr); }
