#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace dualbli {

enum ExitCode : int { exit_ok = 0, exit_usage = 1, exit_data = 2, exit_numerical = 3 };

// Runs one subcommand (synth, train, refine, translate, evaluate). args excludes
// the program name. Reports go to out, diagnostics to err.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dualbli
