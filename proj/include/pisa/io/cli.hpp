#pragma once

#include <ostream>

namespace pisa {

/// Exit codes of the command-line interface.
enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitData = 2, kExitInvariant = 3 };

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace pisa
