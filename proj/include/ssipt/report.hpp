#pragma once

#include "ssipt/sweep_table.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace ssipt {

struct PlotSpec {
    std::string title;
    std::vector<std::string> yColumns;  // empty: every column after the first
};

namespace io {

/// Header plus one line per row; values as %.9g, trailing status column,
/// '\n' line endings.
std::string to_csv(const SweepTable& table);

/// One polyline per selected column against the first column. Rows with a
/// non-finite value are skipped for that series.
std::string to_svg(const SweepTable& table, const PlotSpec& plot);

/// Throw IoError when the file cannot be written.
void emit_csv(const SweepTable& table, const std::filesystem::path& path);
void emit_svg(const SweepTable& table, const PlotSpec& plot, const std::filesystem::path& path);

}  // namespace io
}  // namespace ssipt
