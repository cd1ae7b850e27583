#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "abxlab/error.hpp"

namespace abxlab::cli {

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // gradcheck above tolerance, I/O or training failure
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitEmptyTask = 4;
inline constexpr int kExitInconclusive = 5;

int exit_code(ErrorKind kind) noexcept;

/// Runs one `abxlab` command. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

std::string sha256_hex(std::string_view bytes);

/// SHA-256 of a file, or of every regular file below a directory keyed by
/// its path.
std::map<std::string, std::string> digest_inputs(const std::filesystem::path& path);

}  // namespace abxlab::cli
