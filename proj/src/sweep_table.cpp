#include "ssipt/sweep_table.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace ssipt {

SweepTable::SweepTable(std::vector<std::string> columns) : columns_(std::move(columns)) {
    if (columns_.empty()) throw std::invalid_argument("SweepTable needs at least one column");
}

void SweepTable::add_row(std::vector<double> values, std::string status) {
    if (values.size() != columns_.size()) {
        throw std::invalid_argument("SweepTable row has " + std::to_string(values.size()) +
                                    " values, expected " + std::to_string(columns_.size()));
    }
    rows_.push_back(std::move(values));
    status_.push_back(std::move(status));
}

void SweepTable::add_failed_row(double key, std::string status) {
    std::vector<double> values(columns_.size(), std::numeric_limits<double>::quiet_NaN());
    values.front() = key;
    add_row(std::move(values), std::move(status));
}

std::size_t SweepTable::column_index(const std::string& name) const {
    const auto it = std::find(columns_.begin(), columns_.end(), name);
    if (it == columns_.end()) throw std::out_of_range("no column named '" + name + "'");
    return static_cast<std::size_t>(it - columns_.begin());
}

std::vector<double> SweepTable::column(const std::string& name) const {
    const std::size_t idx = column_index(name);
    std::vector<double> out;
    out.reserve(rows_.size());
    for (const auto& r : rows_) out.push_back(r[idx]);
    return out;
}

}  // namespace ssipt
