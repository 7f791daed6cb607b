#pragma once

// Workbench configuration: `[section]` headers and `key = value` lines, `#`
// comments. Physical keys carry their unit in the name (l1_uH, fs_kHz, ...)
// and are converted to SI on load.

#include "ssipt/circuit.hpp"
#include "ssipt/design.hpp"
#include "ssipt/magnetics.hpp"
#include "ssipt/transient.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ssipt {

struct OutputOptions {
    std::string directory = "out";
    bool csv = true;
    bool svg = true;

    bool operator==(const OutputOptions&) const = default;
};

struct SweepOptions {
    std::vector<double> kGrid;                // dimensionless
    std::vector<double> dxGrid;               // m
    std::vector<double> dyGrid;               // m
    std::vector<double> ferriteDiameterGrid;  // m
    std::vector<double> ferriteLengthGrid;    // m

    bool operator==(const SweepOptions&) const = default;
};

struct AnchorSpec {
    double dx = 0.0;  // m
    double dy = 0.0;  // m
    double k = 0.0;

    bool operator==(const AnchorSpec&) const = default;
};

struct CalibrationOptions {
    std::vector<AnchorSpec> anchors;
    std::optional<double> l1Target;  // H
    std::optional<double> l2Target;  // H

    bool operator==(const CalibrationOptions&) const = default;
};

struct WorkbenchConfig {
    CircuitParams circuit;
    std::optional<CouplerGeometry> geometry;
    std::optional<DesignSpec> design;
    SimOptions sim;
    int exportCycles = 2;
    OutputOptions output;
    SweepOptions sweep;
    CalibrationOptions calibration;

    bool operator==(const WorkbenchConfig&) const = default;
};

namespace io {

/// Throws ConfigError carrying the key and line of the first problem.
WorkbenchConfig parse_config(std::string_view text);

/// Reads and parses a file; an unreadable file is a ConfigError.
WorkbenchConfig load_config(const std::string& path);

/// Text that parses back to an equal config.
std::string serialize_config(const WorkbenchConfig& config);

/// Grid syntax: comma-separated values, or `start:step:stop` inclusive.
std::vector<double> parse_grid(std::string_view text);

}  // namespace io
}  // namespace ssipt
