#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace ctr3 {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitUnreadable = 3;
inline constexpr int kExitInfeasible = 4;

/// Root searched for instance names and the best-known table when
/// CTR3_INSTANCE_DIR is not set.
std::filesystem::path default_data_dir();

/// CTR3_INSTANCE_DIR if set, else default_data_dir()/instances.
std::filesystem::path instance_dir();

/// "1..5", "3" or "1,4,7". Empty optional on malformed text.
std::optional<std::vector<std::uint64_t>> parse_seed_list(std::string_view text);

/// Existing path as given, else <instance_dir>/<arg>, else with ".vrp"
/// appended. Returns the argument unchanged when nothing matches.
std::filesystem::path resolve_instance(const std::string& arg);

/// Entry point behind the executable: subcommands solve, bench, explore and
/// ablate. Regular output goes to `out` (or --out), diagnostics and summary
/// tables in machine formats to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err);

}  // namespace ctr3
