#ifndef PHENOMAP_TOOLS_CLI_HPP
#define PHENOMAP_TOOLS_CLI_HPP

#include <ostream>
#include <string>
#include <vector>

namespace phenomap::cli {

enum ExitCode : int {
    kSuccess = 0,
    kUsage = 1,
    kInput = 2,
    kNumerical = 3,
};

/// Parses `args` (program name first) and runs the selected subcommand.
/// Progress goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace phenomap::cli

#endif
