#include "ssipt/config.hpp"

#include "ssipt/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace ssipt::io {

namespace {

enum class Check { Finite, Positive, NonNegative, Coupling, AtLeastOne };

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double parse_number(std::string_view text, const std::string& key, int line) {
    text = trim(text);
    double v = 0.0;
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || ec != std::errc() || end != text.data() + text.size() || !std::isfinite(v)) {
        throw ConfigError("expected a number, got '" + std::string(text) + "'", key, line);
    }
    return v;
}

int parse_int(std::string_view text, const std::string& key, int line) {
    text = trim(text);
    int v = 0;
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || ec != std::errc() || end != text.data() + text.size()) {
        throw ConfigError("expected an integer, got '" + std::string(text) + "'", key, line);
    }
    return v;
}

bool parse_bool(std::string_view text, const std::string& key, int line) {
    text = trim(text);
    if (text == "true" || text == "yes" || text == "on" || text == "1") return true;
    if (text == "false" || text == "no" || text == "off" || text == "0") return false;
    throw ConfigError("expected true or false, got '" + std::string(text) + "'", key, line);
}

void check_value(double v, Check c, const std::string& key, int line) {
    switch (c) {
        case Check::Finite: return;
        case Check::Positive:
            if (!(v > 0.0)) throw ConfigError("must be positive", key, line);
            return;
        case Check::NonNegative:
            if (!(v >= 0.0)) throw ConfigError("must be non-negative", key, line);
            return;
        case Check::Coupling:
            if (!(v >= 0.0 && v < 1.0)) throw ConfigError("coupling must satisfy 0 <= k < 1", key, line);
            return;
        case Check::AtLeastOne:
            if (!(v >= 1.0)) throw ConfigError("must be >= 1", key, line);
            return;
    }
}

std::string shortest(double v) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

// Display-unit text for an SI value that parses (value * scale) back to the
// identical double.
std::string display(double si, double scale) {
    if (scale == 1.0) return shortest(si);
    const double base = si / scale;
    std::string best;
    // Search a few ulps either side of the quotient for a round-tripping value.
    double lo = base, hi = base;
    for (int i = 0; i <= 8; ++i) {
        for (double c : {lo, hi}) {
            const std::string s = shortest(c);
            double back = 0.0;
            std::from_chars(s.data(), s.data() + s.size(), back);
            if (back * scale == si && (best.empty() || s.size() < best.size())) best = s;
        }
        lo = std::nextafter(lo, -INFINITY);
        hi = std::nextafter(hi, INFINITY);
    }
    return best.empty() ? shortest(base) : best;
}

struct Key {
    std::string name;
    bool required = false;
    bool repeatable = false;
    std::function<void(WorkbenchConfig&, std::string_view, int)> set;
    // Lines to emit (empty when the value is unset).
    std::function<std::vector<std::string>(const WorkbenchConfig&)> get;
};

template <typename Access>
Key real(std::string name, Access access, double scale, Check check, bool required = false) {
    Key k;
    k.name = name;
    k.required = required;
    k.set = [=](WorkbenchConfig& c, std::string_view v, int line) {
        const double x = parse_number(v, name, line);
        check_value(x, check, name, line);
        access(c) = x * scale;
    };
    k.get = [=](const WorkbenchConfig& c) {
        return std::vector<std::string>{display(access(const_cast<WorkbenchConfig&>(c)), scale)};
    };
    return k;
}

template <typename Access>
Key integer(std::string name, Access access, int minimum) {
    Key k;
    k.name = name;
    k.set = [=](WorkbenchConfig& c, std::string_view v, int line) {
        const int x = parse_int(v, name, line);
        if (x < minimum) throw ConfigError("must be at least " + std::to_string(minimum), name, line);
        access(c) = x;
    };
    k.get = [=](const WorkbenchConfig& c) {
        return std::vector<std::string>{std::to_string(access(const_cast<WorkbenchConfig&>(c)))};
    };
    return k;
}

template <typename Access>
Key boolean(std::string name, Access access) {
    Key k;
    k.name = name;
    k.set = [=](WorkbenchConfig& c, std::string_view v, int line) { access(c) = parse_bool(v, name, line); };
    k.get = [=](const WorkbenchConfig& c) {
        return std::vector<std::string>{access(const_cast<WorkbenchConfig&>(c)) ? "true" : "false"};
    };
    return k;
}

template <typename Access>
Key grid(std::string name, Access access, double scale) {
    Key k;
    k.name = name;
    k.set = [=](WorkbenchConfig& c, std::string_view v, int line) {
        std::vector<double> values;
        try {
            values = parse_grid(v);
        } catch (const DomainError& e) {
            throw ConfigError(e.what(), name, line);
        }
        for (double& x : values) x *= scale;
        access(c) = std::move(values);
    };
    k.get = [=](const WorkbenchConfig& c) {
        const auto& values = access(const_cast<WorkbenchConfig&>(c));
        if (values.empty()) return std::vector<std::string>{};
        std::string out;
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (i) out += ", ";
            out += display(values[i], scale);
        }
        return std::vector<std::string>{out};
    };
    return k;
}

template <typename Access>
Key optional_real(std::string name, Access access, double scale, Check check) {
    Key k;
    k.name = name;
    k.set = [=](WorkbenchConfig& c, std::string_view v, int line) {
        const double x = parse_number(v, name, line);
        check_value(x, check, name, line);
        access(c) = x * scale;
    };
    k.get = [=](const WorkbenchConfig& c) {
        const auto& value = access(const_cast<WorkbenchConfig&>(c));
        if (!value) return std::vector<std::string>{};
        return std::vector<std::string>{display(*value, scale)};
    };
    return k;
}

AnchorSpec parse_anchor(std::string_view text, int line) {
    AnchorSpec a;
    bool haveK = false;
    std::istringstream in{std::string(text)};
    std::string token;
    std::set<std::string> seen;
    while (in >> token) {
        const auto eq = token.find('=');
        if (eq == std::string::npos) throw ConfigError("anchor fields are name=value, got '" + token + "'", "anchor", line);
        const std::string name = token.substr(0, eq);
        const std::string_view value = std::string_view(token).substr(eq + 1);
        if (!seen.insert(name).second) throw ConfigError("anchor field '" + name + "' repeated", "anchor", line);
        if (name == "dx_mm") {
            a.dx = parse_number(value, "anchor", line) * 1e-3;
        } else if (name == "dy_mm") {
            a.dy = parse_number(value, "anchor", line) * 1e-3;
        } else if (name == "k") {
            a.k = parse_number(value, "anchor", line);
            check_value(a.k, Check::Coupling, "anchor", line);
            haveK = true;
        } else {
            throw ConfigError("unknown anchor field '" + name + "' (expected dx_mm, dy_mm, k)", "anchor", line);
        }
    }
    if (!haveK) throw ConfigError("anchor needs k=<value>", "anchor", line);
    return a;
}

Key anchor_key() {
    Key k;
    k.name = "anchor";
    k.repeatable = true;
    k.set = [](WorkbenchConfig& c, std::string_view v, int line) {
        c.calibration.anchors.push_back(parse_anchor(v, line));
    };
    k.get = [](const WorkbenchConfig& c) {
        std::vector<std::string> out;
        for (const auto& a : c.calibration.anchors) {
            out.push_back("dx_mm=" + display(a.dx, 1e-3) + " dy_mm=" + display(a.dy, 1e-3) + " k=" + shortest(a.k));
        }
        return out;
    };
    return k;
}

Key text_key(std::string name, std::string OutputOptions::*member) {
    Key k;
    k.name = name;
    k.set = [=](WorkbenchConfig& c, std::string_view v, int line) {
        v = trim(v);
        if (v.empty()) throw ConfigError("must not be empty", name, line);
        c.output.*member = std::string(v);
    };
    k.get = [=](const WorkbenchConfig& c) { return std::vector<std::string>{c.output.*member}; };
    return k;
}

struct Section {
    std::string name;
    std::vector<Key> keys;
};

const std::vector<Section>& sections() {
    static const std::vector<Section> all = [] {
        std::vector<Section> s;
        auto cp = [](auto member) { return [member](WorkbenchConfig& c) -> auto& { return c.circuit.*member; }; };
        s.push_back({"circuit",
                     {
                         real("vdc_V", cp(&CircuitParams::Vdc), 1.0, Check::Positive, true),
                         real("vb_V", cp(&CircuitParams::Vb), 1.0, Check::Positive, true),
                         real("fs_kHz", cp(&CircuitParams::fs), 1e3, Check::Positive, true),
                         real("l1_uH", cp(&CircuitParams::L1), 1e-6, Check::Positive, true),
                         real("l2_uH", cp(&CircuitParams::L2), 1e-6, Check::Positive, true),
                         real("c1_nF", cp(&CircuitParams::C1), 1e-9, Check::Positive, true),
                         real("c2_nF", cp(&CircuitParams::C2), 1e-9, Check::Positive, true),
                         real("k", cp(&CircuitParams::k), 1.0, Check::Coupling, true),
                         real("r1_ohm", cp(&CircuitParams::R1), 1.0, Check::NonNegative),
                         real("r2_ohm", cp(&CircuitParams::R2), 1.0, Check::NonNegative),
                         real("vd_V", cp(&CircuitParams::Vd), 1.0, Check::NonNegative),
                         real("deadtime_ns", cp(&CircuitParams::deadTime), 1e-9, Check::NonNegative),
                     }});
        auto gp = [](auto member) { return [member](WorkbenchConfig& c) -> auto& { return (*c.geometry).*member; }; };
        s.push_back({"geometry",
                     {
                         real("tx_rod_diameter_mm", gp(&CouplerGeometry::txRodDiameter), 1e-3, Check::Positive),
                         real("tx_rod_length_mm", gp(&CouplerGeometry::txRodLength), 1e-3, Check::Positive),
                         integer("tx_turns_per_rod", gp(&CouplerGeometry::txTurnsPerRod), 1),
                         real("tx_wire_radius_mm", gp(&CouplerGeometry::txWireRadius), 1e-3, Check::Positive),
                         real("tx_rod_spacing_mm", gp(&CouplerGeometry::txRodSpacing), 1e-3, Check::Positive),
                         real("rx_ferrite_diameter_mm", gp(&CouplerGeometry::rxFerriteDiameter), 1e-3, Check::Positive),
                         real("rx_ferrite_length_mm", gp(&CouplerGeometry::rxFerriteLength), 1e-3, Check::Positive),
                         integer("rx_turns_per_leg", gp(&CouplerGeometry::rxTurnsPerLeg), 1),
                         real("rx_wire_radius_mm", gp(&CouplerGeometry::rxWireRadius), 1e-3, Check::Positive),
                         real("rx_leg_spacing_mm", gp(&CouplerGeometry::rxLegSpacing), 1e-3, Check::Positive),
                         real("air_gap_mm", gp(&CouplerGeometry::airGap), 1e-3, Check::Positive),
                         real("dx_mm", gp(&CouplerGeometry::dx), 1e-3, Check::Finite),
                         real("dy_mm", gp(&CouplerGeometry::dy), 1e-3, Check::Finite),
                         real("mu_eff_tx", gp(&CouplerGeometry::muEffTx), 1.0, Check::AtLeastOne),
                         real("mu_eff_rx", gp(&CouplerGeometry::muEffRx), 1.0, Check::AtLeastOne),
                     }});
        auto dp = [](auto member) { return [member](WorkbenchConfig& c) -> auto& { return (*c.design).*member; }; };
        s.push_back({"design",
                     {
                         real("i1_max_zero_k_A", dp(&DesignSpec::I1maxZeroK), 1.0, Check::Positive),
                         real("target_pout_W", dp(&DesignSpec::targetPout), 1.0, Check::Positive),
                         real("k_nominal", dp(&DesignSpec::kNominal), 1.0, Check::Coupling),
                         real("k_min", dp(&DesignSpec::kMin), 1.0, Check::Coupling),
                         real("k_max", dp(&DesignSpec::kMax), 1.0, Check::Coupling),
                         boolean("zvs_required", dp(&DesignSpec::zvsRequired)),
                         real("band_low", dp(&DesignSpec::bandLow), 1.0, Check::Positive),
                         real("band_high", dp(&DesignSpec::bandHigh), 1.0, Check::Positive),
                         integer("k_grid_points", dp(&DesignSpec::kGridPoints), 1),
                     }});
        auto sp = [](auto member) { return [member](WorkbenchConfig& c) -> auto& { return c.sim.*member; }; };
        s.push_back({"sim",
                     {
                         integer("max_cycles", sp(&SimOptions::maxCycles), 1),
                         integer("steps_per_cycle", sp(&SimOptions::stepsPerCycle), 200),
                         real("steady_tol", sp(&SimOptions::steadyTolerance), 1.0, Check::Positive),
                         integer("steady_cycles", sp(&SimOptions::steadyCycles), 1),
                         integer("retain_cycles", sp(&SimOptions::retainCycles), 1),
                         integer("export_cycles", [](WorkbenchConfig& c) -> int& { return c.exportCycles; }, 1),
                     }});
        s.push_back({"output",
                     {
                         text_key("directory", &OutputOptions::directory),
                         boolean("csv", [](WorkbenchConfig& c) -> bool& { return c.output.csv; }),
                         boolean("svg", [](WorkbenchConfig& c) -> bool& { return c.output.svg; }),
                     }});
        auto wp = [](auto member) { return [member](WorkbenchConfig& c) -> auto& { return c.sweep.*member; }; };
        s.push_back({"sweep",
                     {
                         grid("k_grid", wp(&SweepOptions::kGrid), 1.0),
                         grid("dx_grid_mm", wp(&SweepOptions::dxGrid), 1e-3),
                         grid("dy_grid_mm", wp(&SweepOptions::dyGrid), 1e-3),
                         grid("ferrite_diameter_grid_mm", wp(&SweepOptions::ferriteDiameterGrid), 1e-3),
                         grid("ferrite_length_grid_mm", wp(&SweepOptions::ferriteLengthGrid), 1e-3),
                     }});
        s.push_back({"calibration",
                     {
                         anchor_key(),
                         optional_real("l1_target_uH", [](WorkbenchConfig& c) -> auto& { return c.calibration.l1Target; },
                                       1e-6, Check::Positive),
                         optional_real("l2_target_uH", [](WorkbenchConfig& c) -> auto& { return c.calibration.l2Target; },
                                       1e-6, Check::Positive),
                     }});
        return s;
    }();
    return all;
}

const Section* find_section(std::string_view name) {
    for (const auto& s : sections()) {
        if (s.name == name) return &s;
    }
    return nullptr;
}

std::string unknown_key_message(const Section& s, const std::string& key) {
    for (const auto& k : s.keys) {
        if (k.name.size() > key.size() && k.name.compare(0, key.size(), key) == 0 && k.name[key.size()] == '_') {
            return "unknown key in [" + s.name + "]; physical keys carry their unit, e.g. '" + k.name + "'";
        }
    }
    return "unknown key in [" + s.name + "]";
}

}  // namespace

std::vector<double> parse_grid(std::string_view text) {
    text = trim(text);
    if (text.empty()) throw DomainError("empty grid");
    std::vector<double> out;
    const auto number = [](std::string_view t) {
        t = trim(t);
        double v = 0.0;
        const auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
        if (t.empty() || ec != std::errc() || end != t.data() + t.size() || !std::isfinite(v)) {
            throw DomainError("bad grid value '" + std::string(t) + "'");
        }
        return v;
    };
    if (text.find(':') != std::string_view::npos) {
        const auto c1 = text.find(':');
        const auto c2 = text.find(':', c1 + 1);
        if (c2 == std::string_view::npos || text.find(':', c2 + 1) != std::string_view::npos) {
            throw DomainError("range grid is start:step:stop");
        }
        const double start = number(text.substr(0, c1));
        const double step = number(text.substr(c1 + 1, c2 - c1 - 1));
        const double stop = number(text.substr(c2 + 1));
        if (!(step > 0.0) || stop < start) throw DomainError("range grid needs step > 0 and stop >= start");
        const double span = (stop - start) / step;
        if (span > 1e6) throw DomainError("range grid has too many points");
        const long n = static_cast<long>(std::floor(span + 1e-9));
        for (long i = 0; i <= n; ++i) out.push_back(start + static_cast<double>(i) * step);
    } else {
        std::size_t pos = 0;
        while (pos <= text.size()) {
            const auto comma = text.find(',', pos);
            const auto piece = text.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
            out.push_back(number(piece));
            if (comma == std::string_view::npos) break;
            pos = comma + 1;
        }
    }
    for (std::size_t i = 1; i < out.size(); ++i) {
        if (!(out[i] > out[i - 1])) throw DomainError("grid must be strictly ascending");
    }
    return out;
}

WorkbenchConfig parse_config(std::string_view text) {
    WorkbenchConfig cfg;
    const Section* current = nullptr;
    std::map<std::string, int> sectionLine;
    std::set<std::string> seenKeys;  // "section.key"
    int lineNo = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++lineNo;

        // '#' starts a comment at line start or after whitespace.
        for (std::size_t i = 0; i < line.size(); ++i) {
            if (line[i] == '#' && (i == 0 || line[i - 1] == ' ' || line[i - 1] == '\t')) {
                line = line.substr(0, i);
                break;
            }
        }
        line = trim(line);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError("malformed section header", "", lineNo);
            const std::string name(trim(line.substr(1, line.size() - 2)));
            current = find_section(name);
            if (!current) throw ConfigError("unknown section [" + name + "]", "", lineNo);
            if (!sectionLine.emplace(name, lineNo).second) {
                throw ConfigError("section [" + name + "] appears twice", "", lineNo);
            }
            if (name == "geometry") cfg.geometry.emplace();
            if (name == "design") cfg.design.emplace();
            continue;
        }

        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ConfigError("expected key = value", "", lineNo);
        const std::string key(trim(line.substr(0, eq)));
        const std::string_view value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("missing key before '='", "", lineNo);
        if (!current) throw ConfigError("key outside any [section]", key, lineNo);

        const Key* spec = nullptr;
        for (const auto& k : current->keys) {
            if (k.name == key) spec = &k;
        }
        if (!spec) throw ConfigError(unknown_key_message(*current, key), key, lineNo);
        if (!spec->repeatable && !seenKeys.insert(current->name + "." + key).second) {
            throw ConfigError("duplicate key", key, lineNo);
        }
        spec->set(cfg, value, lineNo);
    }

    if (!sectionLine.count("circuit")) throw ConfigError("missing circuit block");
    for (const auto& s : sections()) {
        if (!sectionLine.count(s.name)) continue;
        for (const auto& k : s.keys) {
            if (k.required && !seenKeys.count(s.name + "." + k.name)) {
                throw ConfigError("missing required key in [" + s.name + "]", k.name, sectionLine[s.name]);
            }
        }
    }

    try {
        circuit::validate(cfg.circuit);
    } catch (const DomainError& e) {
        throw ConfigError(std::string("[circuit] ") + e.what(), "", sectionLine["circuit"]);
    }
    if (cfg.geometry) {
        try {
            magnetics::validate(*cfg.geometry);
        } catch (const DomainError& e) {
            throw ConfigError(std::string("[geometry] ") + e.what(), "", sectionLine["geometry"]);
        }
    }
    if (cfg.design) {
        try {
            design::validate(*cfg.design);
        } catch (const DomainError& e) {
            throw ConfigError(std::string("[design] ") + e.what(), "", sectionLine["design"]);
        }
    }
    if (cfg.exportCycles > cfg.sim.retainCycles) {
        throw ConfigError("export_cycles exceeds retain_cycles", "export_cycles", sectionLine.count("sim") ? sectionLine["sim"] : 0);
    }
    return cfg;
}

WorkbenchConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string serialize_config(const WorkbenchConfig& cfg) {
    std::string out;
    for (const auto& s : sections()) {
        if (s.name == "geometry" && !cfg.geometry) continue;
        if (s.name == "design" && !cfg.design) continue;
        std::string body;
        for (const auto& k : s.keys) {
            for (const auto& v : k.get(cfg)) body += k.name + " = " + v + "\n";
        }
        if (body.empty()) continue;
        if (!out.empty()) out += "\n";
        out += "[" + s.name + "]\n" + body;
    }
    return out;
}

}  // namespace ssipt::io
