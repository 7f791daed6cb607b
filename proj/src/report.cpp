#include "ssipt/report.hpp"

#include "ssipt/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

namespace ssipt::io {

namespace {

std::string num(double v, const char* pattern = "%.9g") {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[48];
    std::snprintf(buf, sizeof buf, pattern, v);
    return buf;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c == '\n' ? ' ' : c;
    }
    return out + "\"";
}

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << text;
    out.flush();
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

}  // namespace

std::string to_csv(const SweepTable& t) {
    std::string out;
    for (const auto& c : t.columns()) out += csv_field(c) + ",";
    out += "status\n";
    for (std::size_t i = 0; i < t.row_count(); ++i) {
        for (double v : t.row(i)) out += num(v) + ",";
        out += csv_field(t.status(i)) + "\n";
    }
    return out;
}

std::string to_svg(const SweepTable& t, const PlotSpec& plot) {
    std::vector<std::size_t> series;
    if (plot.yColumns.empty()) {
        for (std::size_t c = 1; c < t.column_count(); ++c) series.push_back(c);
    } else {
        for (const auto& name : plot.yColumns) series.push_back(t.column_index(name));
    }

    constexpr double W = 640, H = 420, left = 70, right = 20, top = 40, bottom = 60;
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    for (std::size_t i = 0; i < t.row_count(); ++i) {
        const double x = t.row(i)[0];
        if (!std::isfinite(x)) continue;
        for (std::size_t c : series) {
            const double y = t.row(i)[c];
            if (!std::isfinite(y)) continue;
            xmin = std::min(xmin, x);
            xmax = std::max(xmax, x);
            ymin = std::min(ymin, y);
            ymax = std::max(ymax, y);
        }
    }
    if (!std::isfinite(xmin)) xmin = 0, xmax = 1, ymin = 0, ymax = 1;
    if (xmax == xmin) xmin -= 0.5, xmax += 0.5;
    if (ymax == ymin) ymin -= 0.5, ymax += 0.5;
    const auto px = [&](double x) { return left + (x - xmin) / (xmax - xmin) * (W - left - right); };
    const auto py = [&](double y) { return H - bottom - (y - ymin) / (ymax - ymin) * (H - top - bottom); };

    std::string s;
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"420\" viewBox=\"0 0 640 420\">\n";
    s += "<rect width=\"640\" height=\"420\" fill=\"white\"/>\n";
    if (!plot.title.empty()) {
        s += "<text x=\"320\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">" +
             xml_escape(plot.title) + "</text>\n";
    }
    s += "<line x1=\"" + num(left, "%.2f") + "\" y1=\"" + num(H - bottom, "%.2f") + "\" x2=\"" + num(W - right, "%.2f") +
         "\" y2=\"" + num(H - bottom, "%.2f") + "\" stroke=\"black\"/>\n";
    s += "<line x1=\"" + num(left, "%.2f") + "\" y1=\"" + num(top, "%.2f") + "\" x2=\"" + num(left, "%.2f") +
         "\" y2=\"" + num(H - bottom, "%.2f") + "\" stroke=\"black\"/>\n";
    const auto label = [&](double x, double y, const std::string& text, const char* anchor, bool vertical = false) {
        s += "<text x=\"" + num(x, "%.2f") + "\" y=\"" + num(y, "%.2f") + "\" text-anchor=\"" + anchor +
             "\" font-family=\"sans-serif\" font-size=\"12\"";
        if (vertical) s += " transform=\"rotate(-90 " + num(x, "%.2f") + " " + num(y, "%.2f") + ")\"";
        s += ">" + xml_escape(text) + "</text>\n";
    };
    label(left, H - bottom + 18, num(xmin, "%.4g"), "middle");
    label(W - right, H - bottom + 18, num(xmax, "%.4g"), "middle");
    label(left - 6, H - bottom, num(ymin, "%.4g"), "end");
    label(left - 6, top + 4, num(ymax, "%.4g"), "end");
    label((left + W - right) / 2, H - 18, t.columns().front(), "middle");
    std::string yLabel;
    for (std::size_t c : series) yLabel += (yLabel.empty() ? "" : ", ") + t.columns()[c];
    label(18, (top + H - bottom) / 2, yLabel, "middle", true);

    for (std::size_t n = 0; n < series.size(); ++n) {
        const std::size_t c = series[n];
        std::string points;
        for (std::size_t i = 0; i < t.row_count(); ++i) {
            const double x = t.row(i)[0], y = t.row(i)[c];
            if (!std::isfinite(x) || !std::isfinite(y)) continue;
            if (!points.empty()) points += ' ';
            points += num(px(x), "%.2f") + "," + num(py(y), "%.2f");
        }
        s += "<polyline data-column=\"" + xml_escape(t.columns()[c]) + "\" fill=\"none\" stroke=\"" +
             kPalette[n % std::size(kPalette)] + "\" stroke-width=\"1.5\" points=\"" + points + "\"/>\n";
    }
    s += "</svg>\n";
    return s;
}

void emit_csv(const SweepTable& table, const std::filesystem::path& path) { write_file(path, to_csv(table)); }

void emit_svg(const SweepTable& table, const PlotSpec& plot, const std::filesystem::path& path) {
    write_file(path, to_svg(table, plot));
}

}  // namespace ssipt::io
