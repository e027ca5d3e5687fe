#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace eals::cli {

enum ExitCode : int {
    exit_ok = 0,
    exit_usage = 1,
    exit_validation = 2,
    exit_io = 3,
};

/// Entry point of the `eals` tool. Never throws; failures map to exit codes.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);
/// `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// FNV-1a 64 of a file's bytes, as 16 hex digits.
std::string file_fingerprint(const std::string& path);

}  // namespace eals::cli
