#pragma once

// Command-line front end. run() is the whole program minus process exit, so
// tests can drive subcommands in-process.
//
// Exit codes: 0 success, 1 domain or I/O error ("error: <Kind>: <message>"
// on the error stream), 2 usage error.

#include <iosfwd>
#include <string>
#include <vector>

namespace reactkit::cli {

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace reactkit::cli
