#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "latsep/lattice.hpp"

namespace latsep {

/// Exit codes of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitRuntime = 2 };

/// Runs the tool on args (without the program name). JSON results go to out,
/// usage and diagnostics to err.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// "re,im". Throws InvalidArgument on malformed text.
Complex parse_complex(const std::string& text);

/// "re,im;re,im". Throws InvalidArgument on malformed text.
LatticeBasis parse_basis(const std::string& text);

}  // namespace latsep
