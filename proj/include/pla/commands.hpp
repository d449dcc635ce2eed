#pragma once

// Subcommands of the pla tool: gen-data, train, eval, tune-demo, report.

#include <iosfwd>
#include <string>
#include <vector>

namespace pla::cli {

/// args excludes the program name. Returns the process exit status.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace pla::cli
