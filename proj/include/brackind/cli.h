#ifndef BRACKIND_CLI_H_
#define BRACKIND_CLI_H_

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace brackind::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2 };

// Entry point of the command-line tool. args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Hex SHA-256 of a file's contents.
std::string sha256_file(const std::filesystem::path& path);

}  // namespace brackind::cli

#endif  // BRACKIND_CLI_H_
