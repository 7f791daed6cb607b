#include "ssipt/magnetics.hpp"

#include "ssipt/error.hpp"
#include "ssipt/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <tuple>

namespace ssipt::magnetics {

namespace {

Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
Vec3 operator*(double s, Vec3 a) { return {s * a.x, s * a.y, s * a.z}; }
double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
Vec3 cross(Vec3 a, Vec3 b) { return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x}; }
double norm(Vec3 a) { return std::sqrt(dot(a, a)); }

// Compensated (Neumaier) sum.
class KahanSum {
public:
    void add(double v) {
        const double t = sum_ + v;
        if (std::abs(sum_) >= std::abs(v)) {
            c_ += (sum_ - t) + v;
        } else {
            c_ += (v - t) + sum_;
        }
        sum_ = t;
    }
    double value() const { return sum_ + c_; }

private:
    double sum_ = 0.0;
    double c_ = 0.0;
};

// Sums in a fixed order (ascending) so the result does not depend on the
// order the terms were produced in.
double canonical_sum(std::vector<double> terms) {
    std::sort(terms.begin(), terms.end());
    KahanSum s;
    for (double t : terms) s.add(t);
    return s.value();
}

bool loop_less(const FilamentLoop& a, const FilamentLoop& b) {
    return std::tie(a.center.x, a.center.y, a.center.z, a.axis.x, a.axis.y, a.axis.z, a.radius, a.currentSense) <
           std::tie(b.center.x, b.center.y, b.center.z, b.axis.x, b.axis.y, b.axis.z, b.radius, b.currentSense);
}

// Orthonormal pair spanning the loop plane.
std::pair<Vec3, Vec3> plane_basis(Vec3 n) {
    const Vec3 helper = std::abs(n.x) < 0.9 ? Vec3{1.0, 0.0, 0.0} : Vec3{0.0, 1.0, 0.0};
    Vec3 u = cross(helper, n);
    u = (1.0 / norm(u)) * u;
    return {u, cross(n, u)};
}

constexpr double kSingularGap = 1e-6;  // m
constexpr double kParallelTol = 1e-12;

void require_loop(const FilamentLoop& l) {
    if (!(l.radius > 0.0)) throw GeometryError("filament loop radius must be positive");
    if (std::abs(norm(l.axis) - 1.0) > 1e-9) throw GeometryError("filament loop axis must be a unit vector");
    if (l.currentSense != 1 && l.currentSense != -1) throw GeometryError("filament current sense must be +1 or -1");
}

void require_positive(double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw GeometryError(std::string(name) + " must be positive");
}

}  // namespace

void validate(const CouplerGeometry& g) {
    require_positive(g.txRodDiameter, "txRodDiameter");
    require_positive(g.txRodLength, "txRodLength");
    require_positive(g.txWireRadius, "txWireRadius");
    require_positive(g.txRodSpacing, "txRodSpacing");
    require_positive(g.rxFerriteDiameter, "rxFerriteDiameter");
    require_positive(g.rxFerriteLength, "rxFerriteLength");
    require_positive(g.rxWireRadius, "rxWireRadius");
    require_positive(g.rxLegSpacing, "rxLegSpacing");
    require_positive(g.airGap, "airGap");
    if (g.txTurnsPerRod < 1) throw GeometryError("txTurnsPerRod must be at least 1");
    if (g.rxTurnsPerLeg < 1) throw GeometryError("rxTurnsPerLeg must be at least 1");
    if (!std::isfinite(g.dx) || !std::isfinite(g.dy)) throw GeometryError("misalignment must be finite");
    if (!(g.muEffTx >= 1.0) || !(g.muEffRx >= 1.0)) throw GeometryError("muEff factors must be >= 1");

    // Winding outer radii: the two pieces of a side may not touch.
    const double txOuter = g.txRodDiameter / 2.0 + 2.0 * g.txWireRadius;
    const double rxOuter = g.rxFerriteDiameter / 2.0 + 2.0 * g.rxWireRadius;
    if (g.txRodSpacing <= 2.0 * txOuter) throw GeometryError("transmitter rods overlap");
    if (g.rxLegSpacing <= 2.0 * rxOuter) throw GeometryError("receiver legs overlap");
    // Rods end at z = 0 and legs start at z = airGap > 0, so the two sides
    // cannot intersect once airGap is positive.
}

CoilPair discretize(const CouplerGeometry& g) {
    validate(g);
    CoilPair out;
    const auto place = [](FilamentCoil& coil, double cx, double cy, double z0, double length, int turns,
                          double radius) {
        for (int i = 0; i < turns; ++i) {
            const double z = turns == 1 ? z0 + length / 2.0 : z0 + i * length / (turns - 1);
            coil.loops.push_back({{cx, cy, z}, {0.0, 0.0, 1.0}, radius, 1});
        }
    };
    const double txRadius = g.txRodDiameter / 2.0 + g.txWireRadius;
    const double rxRadius = g.rxFerriteDiameter / 2.0 + g.rxWireRadius;
    for (double side : {-1.0, 1.0}) {
        place(out.tx, side * g.txRodSpacing / 2.0, 0.0, -g.txRodLength, g.txRodLength, g.txTurnsPerRod, txRadius);
    }
    for (double side : {-1.0, 1.0}) {
        place(out.rx, side * g.rxLegSpacing / 2.0 + g.dx, g.dy, g.airGap, g.rxFerriteLength, g.rxTurnsPerLeg,
              rxRadius);
    }
    return out;
}

double loop_mutual_coaxial(double a, double b, double d) {
    if (!(a > 0.0) || !(b > 0.0)) throw DomainError("loop radii must be positive");
    d = std::abs(d);
    if (d < kSingularGap && std::abs(a - b) < kSingularGap) {
        throw SingularityError("coincident filament loops");
    }
    const double m = 4.0 * a * b / ((a + b) * (a + b) + d * d);
    const double k = std::sqrt(m);
    double bracket = 0.0;  // (1 - m/2) K(k) - E(k)
    if (m < 1e-4) {
        // Series avoids the cancellation between K and E in the far field.
        bracket = std::numbers::pi / 2.0 * (m * m / 16.0) * (1.0 + 0.75 * m);
    } else {
        bracket = (1.0 - m / 2.0) * std::comp_ellint_1(k) - std::comp_ellint_2(k);
    }
    return kMu0 * std::sqrt(a * b) * (2.0 / k) * bracket;
}

double loop_mutual_neumann(const FilamentLoop& a, const FilamentLoop& b, int segments) {
    require_loop(a);
    require_loop(b);
    if (segments < 4) throw DomainError("contour integration needs at least 4 segments");
    const auto [ua, va] = plane_basis(a.axis);
    const auto [ub, vb] = plane_basis(b.axis);
    const double dt = 2.0 * std::numbers::pi / segments;

    std::vector<Vec3> pb(segments), tb(segments);
    for (int j = 0; j < segments; ++j) {
        const double t = (j + 0.5) * dt;
        const double c = std::cos(t), s = std::sin(t);
        pb[j] = b.center + b.radius * (c * ub + s * vb);
        tb[j] = (b.radius * dt) * ((-s) * ub + c * vb);
    }
    KahanSum total;
    for (int i = 0; i < segments; ++i) {
        const double t = (i + 0.5) * dt;
        const double c = std::cos(t), s = std::sin(t);
        const Vec3 pa = a.center + a.radius * (c * ua + s * va);
        const Vec3 ta = (a.radius * dt) * ((-s) * ua + c * va);
        double row = 0.0;
        for (int j = 0; j < segments; ++j) {
            const double r = norm(pa - pb[j]);
            if (r < kSingularGap) throw SingularityError("filament loops intersect");
            row += dot(ta, tb[j]) / r;
        }
        total.add(row);
    }
    return kMu0 / (4.0 * std::numbers::pi) * a.currentSense * b.currentSense * total.value();
}

double loop_mutual(const FilamentLoop& a0, const FilamentLoop& b0) {
    // Evaluate every pair in one fixed orientation so M(a, b) == M(b, a) bitwise.
    const bool swap = loop_less(b0, a0);
    const FilamentLoop& a = swap ? b0 : a0;
    const FilamentLoop& b = swap ? a0 : b0;
    require_loop(a);
    require_loop(b);

    const Vec3 axisCross = cross(a.axis, b.axis);
    const Vec3 offset = b.center - a.center;
    const double axial = dot(offset, a.axis);
    const Vec3 radial = offset - axial * a.axis;
    const double scale = std::max(a.radius, b.radius);
    if (norm(axisCross) < kParallelTol && norm(radial) < kParallelTol * scale) {
        const double orientation = dot(a.axis, b.axis) > 0.0 ? 1.0 : -1.0;
        return orientation * a.currentSense * b.currentSense * loop_mutual_coaxial(a.radius, b.radius, axial);
    }

    const double m64 = loop_mutual_neumann(a, b, 64);
    const double m128 = loop_mutual_neumann(a, b, 128);
    if (std::abs(m128 - m64) > 0.005 * std::abs(m128)) return loop_mutual_neumann(a, b, 256);
    return m128;
}

double mutual_filament(const FilamentCoil& a, const FilamentCoil& b) {
    if (a.loops.empty() || b.loops.empty()) throw DomainError("filament coil has no loops");
    std::vector<double> terms;
    terms.reserve(a.loops.size() * b.loops.size());
    for (const auto& la : a.loops) {
        for (const auto& lb : b.loops) terms.push_back(loop_mutual(la, lb));
    }
    return canonical_sum(std::move(terms));
}

double self_inductance(const FilamentCoil& coil, double wireRadius, double muEff) {
    if (coil.loops.empty()) throw DomainError("filament coil has no loops");
    if (!(wireRadius > 0.0)) throw DomainError("wire radius must be positive");
    if (!(muEff > 0.0)) throw DomainError("muEff must be positive");
    std::vector<double> terms;
    const auto& loops = coil.loops;
    for (std::size_t i = 0; i < loops.size(); ++i) {
        const double R = loops[i].radius;
        if (wireRadius >= R) throw DomainError("wire radius must be smaller than the loop radius");
        terms.push_back(kMu0 * R * (std::log(8.0 * R / wireRadius) - 1.75));
        for (std::size_t j = i + 1; j < loops.size(); ++j) terms.push_back(2.0 * loop_mutual(loops[i], loops[j]));
    }
    return muEff * canonical_sum(std::move(terms));
}

double demagnetizing_factor(double m) {
    if (!(m > 0.0)) throw DomainError("aspect ratio must be positive");
    if (std::abs(m - 1.0) < 1e-9) return 1.0 / 3.0;
    if (m > 1.0) {
        const double q = std::sqrt(m * m - 1.0);
        return (m / q * std::log(m + q) - 1.0) / (m * m - 1.0);
    }
    const double q = std::sqrt(1.0 - m * m);
    return (1.0 - m / q * std::acos(m)) / (1.0 - m * m);
}

double rod_apparent_permeability(double mu, double aspect) {
    if (!(mu > 0.0)) throw DomainError("permeability must be positive");
    const double nd = demagnetizing_factor(aspect);
    return mu / (1.0 + nd * (mu - 1.0));
}

namespace {

struct AirValues {
    double L1 = 0.0;
    double L2 = 0.0;
    double M = 0.0;
    double rxAspect = 1.0;
};

AirValues air_values(const CouplerGeometry& g) {
    const CoilPair coils = discretize(g);
    AirValues v;
    v.L1 = self_inductance(coils.tx, g.txWireRadius);
    v.L2 = self_inductance(coils.rx, g.rxWireRadius);
    v.M = mutual_filament(coils.tx, coils.rx);
    v.rxAspect = g.rxFerriteLength / g.rxFerriteDiameter;
    return v;
}

double clamp_k(double k) {
    if (k < 0.0) return 0.0;
    if (k >= 1.0) return std::nextafter(1.0, 0.0);
    return k;
}

}  // namespace

CouplerInductances analyze(const CouplerGeometry& g) {
    const AirValues air = air_values(g);
    CouplerInductances out;
    out.L1air = air.L1;
    out.L2air = air.L2;
    out.Mair = air.M;
    out.muTx = g.muEffTx;
    out.muRx = rod_apparent_permeability(g.muEffRx, air.rxAspect);
    out.L1 = out.muTx * air.L1;
    out.L2 = out.muRx * air.L2;
    out.M = out.muTx * out.muRx * air.M;
    out.kUnclamped = out.M / std::sqrt(out.L1 * out.L2);
    out.k = clamp_k(out.kUnclamped);
    return out;
}

double coupling_coefficient(const CouplerGeometry& g) { return analyze(g).k; }

const char* sweep_variable_name(SweepVariable v) {
    switch (v) {
        case SweepVariable::Dx: return "dx_m";
        case SweepVariable::Dy: return "dy_m";
        case SweepVariable::RxFerriteDiameter: return "rx_ferrite_diameter_m";
        case SweepVariable::RxFerriteLength: return "rx_ferrite_length_m";
    }
    return "?";
}

SweepVariable parse_sweep_variable(const std::string& name) {
    if (name == "dx") return SweepVariable::Dx;
    if (name == "dy") return SweepVariable::Dy;
    if (name == "rx_ferrite_diameter") return SweepVariable::RxFerriteDiameter;
    if (name == "rx_ferrite_length") return SweepVariable::RxFerriteLength;
    throw DomainError("unknown sweep variable '" + name + "'");
}

SweepTable geometry_sweep(const CouplerGeometry& g, SweepVariable variable, std::span<const double> grid) {
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (!(grid[i] > grid[i - 1])) throw DomainError("sweep grid must be strictly ascending");
    }
    struct Row {
        bool ok = false;
        CouplerInductances values;
        std::string error;
    };
    const std::vector<double> points(grid.begin(), grid.end());
    const auto rows = parallel_map(points, [&](double value) {
        CouplerGeometry gg = g;
        switch (variable) {
            case SweepVariable::Dx: gg.dx = value; break;
            case SweepVariable::Dy: gg.dy = value; break;
            case SweepVariable::RxFerriteDiameter: gg.rxFerriteDiameter = value; break;
            case SweepVariable::RxFerriteLength: gg.rxFerriteLength = value; break;
        }
        Row r;
        try {
            r.values = analyze(gg);
            r.ok = true;
        } catch (const DomainError& e) {
            r.error = e.what();
        }
        return r;
    });

    SweepTable table({sweep_variable_name(variable), "k", "l1_H", "l2_H"});
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].ok) {
            table.add_row({points[i], rows[i].values.k, rows[i].values.L1, rows[i].values.L2});
        } else {
            table.add_failed_row(points[i], rows[i].error);
        }
    }
    return table;
}

namespace {

constexpr double kInductanceWeight = 1e-2;
constexpr double kLogMuMax = 13.815510557964274;  // ln(1e6)
constexpr int kMaxOuter = 500;

struct FitProblem {
    std::vector<AirValues> anchors;
    std::vector<double> targets;
    InductanceTargets inductance;

    double k_at(std::size_t i, double muTx, double muRx) const {
        const AirValues& a = anchors[i];
        const double mr = rod_apparent_permeability(muRx, a.rxAspect);
        return clamp_k(std::sqrt(muTx * mr) * a.M / std::sqrt(a.L1 * a.L2));
    }

    double k_residual_sq(double muTx, double muRx) const {
        KahanSum s;
        for (std::size_t i = 0; i < anchors.size(); ++i) {
            const double e = k_at(i, muTx, muRx) - targets[i];
            s.add(e * e);
        }
        return s.value();
    }

    double objective(double muTx, double muRx) const {
        double f = k_residual_sq(muTx, muRx);
        const AirValues& a = anchors.front();
        if (inductance.L1) {
            const double e = std::log(muTx * a.L1 / *inductance.L1);
            f += kInductanceWeight * e * e;
        }
        if (inductance.L2) {
            const double e = std::log(rod_apparent_permeability(muRx, a.rxAspect) * a.L2 / *inductance.L2);
            f += kInductanceWeight * e * e;
        }
        return f;
    }
};

// Golden-section minimum of f on [lo, hi].
template <typename F>
double golden_section(F f, double lo, double hi, double tol) {
    const double r = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - r * (b - a), d = a + r * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > tol) {
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    return (a + b) / 2.0;
}

}  // namespace

CalibrationResult calibrate(std::span<const CalibrationAnchor> anchors, const InductanceTargets& targets) {
    if (anchors.empty()) throw DomainError("calibration needs at least one anchor");
    if ((targets.L1 && !(*targets.L1 > 0.0)) || (targets.L2 && !(*targets.L2 > 0.0))) {
        throw DomainError("inductance targets must be positive");
    }
    FitProblem problem;
    problem.inductance = targets;
    for (const auto& anchor : anchors) {
        if (!(anchor.kTarget >= 0.0 && anchor.kTarget < 1.0)) throw DomainError("anchor k must lie in [0, 1)");
        CouplerGeometry g = anchor.geometry;
        g.muEffTx = 1.0;
        g.muEffRx = 1.0;
        problem.anchors.push_back(air_values(g));
        problem.targets.push_back(anchor.kTarget);
    }

    double u = 0.0;  // ln muEffTx
    double w = 0.0;  // ln muEffRx
    CalibrationResult result;
    auto finish = [&](int iterations) {
        result.muEffTx = std::exp(u);
        result.muEffRx = std::exp(w);
        result.residual = std::sqrt(problem.k_residual_sq(result.muEffTx, result.muEffRx));
        result.objective = problem.objective(result.muEffTx, result.muEffRx);
        result.iterations = iterations;
        return result;
    };

    double f = problem.objective(1.0, 1.0);
    if (f < 1e-14) return finish(0);

    constexpr double kStepTol = 1e-10;
    for (int it = 1; it <= kMaxOuter; ++it) {
        const double uNew = golden_section(
            [&](double x) { return problem.objective(std::exp(x), std::exp(w)); }, 0.0, kLogMuMax, kStepTol);
        const double wNew = golden_section(
            [&](double x) { return problem.objective(std::exp(uNew), std::exp(x)); }, 0.0, kLogMuMax, kStepTol);
        const double fNew = problem.objective(std::exp(uNew), std::exp(wNew));
        // Line searches are not exact; never accept a worse point.
        const bool improved = fNew <= f;
        const double move = std::max(std::abs(uNew - u), std::abs(wNew - w));
        if (improved) {
            u = uNew;
            w = wNew;
        }
        const double gain = f - fNew;
        if (improved) f = fNew;
        if (!improved || move < 1e-8 || gain <= 1e-16 * std::max(1.0, f) || f < 1e-14) return finish(it);
    }
    finish(kMaxOuter);
    throw CalibrationError("muEff fit did not converge in 500 sweeps (residual " +
                               std::to_string(result.residual) + ")",
                           result.residual);
}

}  // namespace ssipt::magnetics
