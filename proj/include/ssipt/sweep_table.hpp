#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace ssipt {

/// Rectangular table of numeric sweep results. Every row carries a status
/// string: "ok" or the error that made the row's values undefined (NaN).
class SweepTable {
public:
    SweepTable() = default;
    explicit SweepTable(std::vector<std::string> columns);

    const std::vector<std::string>& columns() const noexcept { return columns_; }
    std::size_t column_count() const noexcept { return columns_.size(); }
    std::size_t row_count() const noexcept { return rows_.size(); }

    /// Throws std::invalid_argument if the value count does not match.
    void add_row(std::vector<double> values, std::string status = "ok");

    /// Row with every value NaN, used when a row's computation failed.
    void add_failed_row(double key, std::string status);

    const std::vector<double>& row(std::size_t i) const { return rows_.at(i); }
    const std::string& status(std::size_t i) const { return status_.at(i); }
    bool ok(std::size_t i) const { return status_.at(i) == "ok"; }

    std::size_t column_index(const std::string& name) const;
    std::vector<double> column(const std::string& name) const;

    bool operator==(const SweepTable&) const = default;

private:
    std::vector<std::string> columns_;
    std::vector<std::vector<double>> rows_;
    std::vector<std::string> status_;
};

}  // namespace ssipt
