#pragma once

#include "ssipt/config.hpp"

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

namespace ssipt::cli {

inline constexpr const char* kUsage =
    "usage: ssipt <analyze|simulate|sweep-k|sweep-misalign|coupler|design|calibrate> --config <path> [--out <dir>]\n";

bool is_command(const std::string& name);

/// --out wins, then the SSIPT_OUT environment variable, then [output] directory.
std::filesystem::path output_directory(const WorkbenchConfig& config, const std::optional<std::string>& outFlag);

/// Runs one subcommand. Returns 0 on success, 1 for domain, infeasible,
/// divergence or I/O failures, 2 for configuration problems and unknown
/// commands.
int dispatch(const std::string& command, const WorkbenchConfig& config, const std::filesystem::path& outDir,
             std::ostream& out, std::ostream& err);

}  // namespace ssipt::cli
