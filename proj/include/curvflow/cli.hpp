#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace curvflow::cli {

// Exit-code contract of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;     // usage, schema and I/O errors
inline constexpr int kExitSingular = 2;  // numerical singularity, failed oracle case

// Entry point of the `curvflow` tool with subcommands flow, metrics, oracle
// and plot. Writes normal output to `out` and diagnostics to `err`.
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// `pow2`, `every:K`, `list:a,b,c` or `none`. Throws SpecError.
[[nodiscard]] std::vector<std::size_t> parse_schedule(const std::string& text, std::size_t steps);

// Lowercase hex digest. Throws IoError.
[[nodiscard]] std::string sha256_file(const std::filesystem::path& path);

// Current UTC time as YYYY-MM-DDTHH:MM:SSZ.
[[nodiscard]] std::string utc_timestamp();

}  // namespace curvflow::cli
