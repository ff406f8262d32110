// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace resmaster {

/// Entry point of the `resmaster` tool. Returns the process exit code:
/// 0 on success, 1 on runtime failures (missing files, bad config, failed
/// self-test), 2 on usage errors.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Runs the built-in invariant checks, one line per check. Returns true when all pass.
bool run_selftest(std::ostream& out);

}  // namespace resmaster
