#include "ssipt/design.hpp"

#include "ssipt/error.hpp"
#include "ssipt/fha.hpp"
#include "ssipt/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

namespace ssipt::design {

namespace {

std::string fmt(const char* pattern, double a, double b) {
    char buf[160];
    std::snprintf(buf, sizeof buf, pattern, a, b);
    return buf;
}

}  // namespace

void validate(const DesignSpec& s) {
    if (!(s.I1maxZeroK > 0.0)) throw DomainError("I1maxZeroK must be positive");
    if (!(s.targetPout > 0.0)) throw DomainError("targetPout must be positive");
    if (!(s.kMin >= 0.0 && s.kMin <= s.kNominal && s.kNominal <= s.kMax && s.kMax < 1.0)) {
        throw DomainError("need 0 <= kMin <= kNominal <= kMax < 1");
    }
    if (!(s.bandLow > 0.0 && s.bandHigh >= s.bandLow)) throw DomainError("need 0 < bandLow <= bandHigh");
    if (s.kGridPoints < 1) throw DomainError("kGridPoints must be at least 1");
}

DetuningChoice min_detuning_for_current_cap(const CircuitParams& p, double I1max) {
    if (!(I1max > 0.0)) throw DomainError("current cap must be positive");
    circuit::validate(p);
    const double ws = 2.0 * std::numbers::pi * p.fs;
    const double zmin = circuit::fundamental_rms(p.Vdc) / I1max;
    const double x1 = zmin > p.R1 ? std::sqrt(zmin * zmin - p.R1 * p.R1) : 0.0;
    if (x1 >= ws * p.L1) {
        throw InfeasibleError(fmt("current cap needs X1 = %.4g ohm, not below wL1 = %.4g ohm (C1 would be non-positive)",
                                  x1, ws * p.L1));
    }
    DetuningChoice out;
    out.C1 = 1.0 / (ws * (ws * p.L1 - x1));
    out.f1 = circuit::resonant_frequency(p.L1, out.C1);
    return out;
}

std::vector<double> k_grid(const DesignSpec& s) {
    if (s.kMax == s.kMin || s.kGridPoints == 1) return {s.kMin};
    std::vector<double> g;
    for (int i = 0; i < s.kGridPoints; ++i) {
        g.push_back(i + 1 == s.kGridPoints ? s.kMax : s.kMin + (s.kMax - s.kMin) * i / (s.kGridPoints - 1));
    }
    return g;
}

DesignResult evaluate_design(const CircuitParams& params, const DesignSpec& spec) {
    validate(spec);
    DesignResult r;
    r.C1 = params.C1;
    r.f1 = circuit::resonant_frequency(params.L1, params.C1);

    const DerivedParams d = circuit::derive(params);
    if (!(d.X1 > 0.0)) {
        r.reasons.push_back(fmt("primary is not inductively detuned (f1 = %.6g Hz >= fs = %.6g Hz)", r.f1, params.fs));
        return r;
    }

    auto at = [&](double k) {
        CircuitParams p = params;
        p.k = k;
        return fha::solve_operating_point(p);
    };
    try {
        const OperatingPoint zero = at(0.0);
        const OperatingPoint nominal = at(spec.kNominal);
        r.I1zeroK = std::abs(zero.I1);
        r.PoutNominal = nominal.Pout;
        r.PoutMax = nominal.Pout;
        r.zvsAll = zero.zvs && nominal.zvs;
        for (double k : k_grid(spec)) {
            const OperatingPoint op = at(k);
            r.PoutMax = std::max(r.PoutMax, op.Pout);
            r.zvsAll = r.zvsAll && op.zvs;
        }
    } catch (const std::exception& e) {
        r.reasons.push_back(std::string("solver failed: ") + e.what());
        return r;
    }

    // The cap is met with equality by min_detuning_for_current_cap; allow rounding.
    if (r.I1zeroK > spec.I1maxZeroK * (1.0 + 1e-9)) {
        r.reasons.push_back(fmt("zero-coupling current %.4g A exceeds the %.4g A cap", r.I1zeroK, spec.I1maxZeroK));
    }
    if (r.PoutNominal < spec.bandLow * spec.targetPout) {
        r.reasons.push_back(fmt("nominal output %.4g W is below %.4g W", r.PoutNominal, spec.bandLow * spec.targetPout));
    }
    if (r.PoutMax > spec.bandHigh * spec.targetPout) {
        r.reasons.push_back(fmt("output reaches %.4g W, above %.4g W", r.PoutMax, spec.bandHigh * spec.targetPout));
    }
    if (spec.zvsRequired && !r.zvsAll) r.reasons.push_back("input impedance is not inductive at every evaluated k");
    r.feasible = r.reasons.empty();
    return r;
}

SweepTable misalignment_envelope(const CircuitParams& params, const CouplerGeometry& geometry,
                                 std::span<const double> dxGrid, std::span<const double> dyGrid,
                                 const DesignSpec& spec) {
    validate(spec);
    struct Point {
        double dx, dy;
    };
    struct Row {
        std::vector<double> values;
        std::string status = "ok";
    };
    std::vector<Point> points;
    for (double dx : dxGrid) {
        for (double dy : dyGrid) points.push_back({dx, dy});
    }
    const auto rows = parallel_map(points, [&](const Point& pt) {
        constexpr double nan = std::numeric_limits<double>::quiet_NaN();
        Row row;
        row.values = {pt.dx, pt.dy, nan, nan, nan, nan, nan};
        try {
            CouplerGeometry g = geometry;
            g.dx = pt.dx;
            g.dy = pt.dy;
            const double k = magnetics::coupling_coefficient(g);
            CircuitParams p = params;
            p.k = k;
            const OperatingPoint op = fha::solve_operating_point(p);
            DesignSpec point = spec;
            point.kNominal = point.kMin = point.kMax = k;
            const DesignResult dr = evaluate_design(p, point);
            row.values = {pt.dx, pt.dy, k, op.Pout, std::abs(op.I1), op.zvs ? 1.0 : 0.0, dr.feasible ? 1.0 : 0.0};
        } catch (const std::exception& e) {
            row.status = e.what();
        }
        return row;
    });
    SweepTable table({"dx_m", "dy_m", "k", "pout_W", "i1_Arms", "zvs", "feasible"});
    for (const auto& r : rows) table.add_row(r.values, r.status);
    return table;
}

}  // namespace ssipt::design
