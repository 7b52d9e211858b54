// Copyright 2026 The llp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace llp::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitNumerical = 1;
inline constexpr int kExitUsage = 2;

// Runs one subcommand. args[0] is the program name. Errors are reported on
// `err` as a single `llp-error: <kind>: <message>` line.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace llp::cli
