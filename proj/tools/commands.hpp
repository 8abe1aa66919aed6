#pragma once

#include <filesystem>
#include <ostream>

#include "config.hpp"

namespace mra::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitCapability = 3;
inline constexpr int kExitViolation = 4;

// Each command writes <name>.json (and CSV files where tabular) under `out`
// and a short human summary to `log`; the return value is the exit code.
int cmd_source_info(const RunConfig& c, const std::filesystem::path& out, std::ostream& log);
int cmd_bounds(const RunConfig& c, const std::filesystem::path& out, std::ostream& log);
int cmd_simulate(const RunConfig& c, const std::filesystem::path& out, std::ostream& log);
int cmd_definetti(const RunConfig& c, const std::filesystem::path& out, std::ostream& log);
int cmd_codes(const RunConfig& c, const std::filesystem::path& out, std::ostream& log);
int cmd_codewords(const RunConfig& c, const std::filesystem::path& out, std::ostream& log);

}  // namespace mra::cli
