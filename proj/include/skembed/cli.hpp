#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace skembed {

/// Exit codes: 0 pass / feasible, 2 domain-negative, 1 error or usage.
enum ExitCode : int { ExitPass = 0, ExitError = 1, ExitNegative = 2 };

/// The skembed command line. args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace skembed
