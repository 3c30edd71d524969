// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>

namespace qrffsim {

/// Exit codes of every command.
enum Exit : int { kPass = 0, kStatFail = 1, kUsage = 2 };

/// Whole command line, argv[0] included. Tables go to `out`, progress and
/// diagnostics to `err`; machine-readable results only to files.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace qrffsim
