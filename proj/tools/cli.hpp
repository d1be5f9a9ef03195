#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hkq::cli {

// Runs the command line (without the program name). Returns the exit code:
// 0 success, 1 domain error, 2 usage error or unreadable/malformed input.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Lowercase hex SHA-256 of a byte string.
std::string sha256_hex(const std::string& bytes);

}  // namespace hkq::cli
