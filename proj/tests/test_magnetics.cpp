#include "ssipt/error.hpp"
#include "ssipt/magnetics.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

using namespace ssipt;
using doctest::Approx;

namespace {

// Complete elliptic integrals by the arithmetic-geometric mean, independent
// of the standard library's implementation.
struct Elliptic {
    double K;
    double E;
};

Elliptic elliptic_agm(double k) {
    double a = 1.0;
    double b = std::sqrt(1.0 - k * k);
    double c = k;
    double sum = 0.5 * c * c;
    double pow2 = 0.5;
    while (std::abs(c) > 1e-16) {
        const double an = 0.5 * (a + b);
        const double bn = std::sqrt(a * b);
        c = 0.5 * (a - b);
        pow2 *= 2.0;
        sum += pow2 * c * c;
        a = an;
        b = bn;
    }
    const double K = std::numbers::pi / (2.0 * a);
    return {K, K * (1.0 - sum)};
}

// Maxwell's coaxial-loop formula.
double coaxial_oracle(double a, double b, double d) {
    const double k2 = 4.0 * a * b / ((a + b) * (a + b) + d * d);
    const double k = std::sqrt(k2);
    const Elliptic e = elliptic_agm(k);
    return magnetics::kMu0 * std::sqrt(a * b) * ((2.0 / k - k) * e.K - 2.0 / k * e.E);
}

CouplerGeometry calibrated_geometry() {
    CouplerGeometry g;
    g.muEffTx = 34.8298371;
    g.muEffRx = 160.853397;
    return g;
}

FilamentLoop loop_at(double x, double y, double z, double r) { return {{x, y, z}, {0.0, 0.0, 1.0}, r, 1}; }

FilamentCoil dense_coil(int turns, double length, double radius) {
    FilamentCoil c;
    for (int i = 0; i < turns; ++i) c.loops.push_back(loop_at(0.0, 0.0, i * length / (turns - 1), radius));
    return c;
}

std::vector<double> grid(double start, double step, int n) {
    std::vector<double> out;
    for (int i = 0; i < n; ++i) out.push_back(start + i * step);
    return out;
}

}  // namespace

TEST_CASE("AGM oracle reproduces tabulated elliptic values") {
    // K(1/sqrt 2) and E(1/sqrt 2) from the lemniscate constant.
    const Elliptic e = elliptic_agm(1.0 / std::sqrt(2.0));
    CHECK(e.K == Approx(1.8540746773013719).epsilon(1e-14));
    CHECK(e.E == Approx(1.3506438810476755).epsilon(1e-14));
}

TEST_CASE("coaxial closed form against the elliptic oracle") {
    CHECK(magnetics::loop_mutual_coaxial(0.1, 0.1, 0.1) == Approx(coaxial_oracle(0.1, 0.1, 0.1)).epsilon(1e-12));
    for (double d : {0.001, 0.01, 0.05, 0.3, 1.0}) {
        CAPTURE(d);
        CHECK(magnetics::loop_mutual_coaxial(0.07, 0.02, d) ==
              Approx(coaxial_oracle(0.07, 0.02, d)).epsilon(1e-10));
    }
    // Far-field branch joins the dipole limit mu0 pi a^2 b^2 / (2 d^3).
    const double d = 20.0;
    const double dipole = magnetics::kMu0 * std::numbers::pi * 0.01 * 0.01 / (2.0 * d * d * d);
    CHECK(magnetics::loop_mutual_coaxial(0.1, 0.1, d) == Approx(dipole).epsilon(1e-4));
    CHECK_THROWS_AS(magnetics::loop_mutual_coaxial(0.1, 0.1, 0.0), SingularityError);
}

TEST_CASE("contour integration against the elliptic oracle") {
    const double oracle = coaxial_oracle(0.1, 0.1, 0.1);
    const FilamentLoop a = loop_at(0.0, 0.0, 0.0, 0.1);
    const FilamentLoop b = loop_at(0.0, 0.0, 0.1, 0.1);
    for (int n : {64, 128, 256}) {
        CAPTURE(n);
        CHECK(std::abs(magnetics::loop_mutual_neumann(a, b, n) / oracle - 1.0) < 0.005);
    }
    // Tilted frame: rotate both loops onto the x axis.
    FilamentLoop ax{{0.0, 0.0, 0.0}, {1.0, 0.0, 0.0}, 0.1, 1};
    FilamentLoop bx{{0.1, 0.0, 0.0}, {1.0, 0.0, 0.0}, 0.1, 1};
    CHECK(std::abs(magnetics::loop_mutual_neumann(ax, bx, 128) / oracle - 1.0) < 0.005);
    bx.currentSense = -1;
    CHECK(magnetics::loop_mutual_neumann(ax, bx, 128) < 0.0);
}

TEST_CASE("contour integration for side-by-side loops in the dipole limit") {
    // Coplanar loops a distance d apart: M -> -mu0 pi a^2 b^2 / (4 d^3).
    const double r = 0.01;
    const double d = 0.5;
    const double dipole = -magnetics::kMu0 * std::numbers::pi * r * r * r * r / (4.0 * d * d * d);
    const double m = magnetics::loop_mutual(loop_at(0.0, 0.0, 0.0, r), loop_at(d, 0.0, 0.0, r));
    CHECK(m == Approx(dipole).epsilon(0.01));
}

TEST_CASE("reciprocity is exact") {
    const CoilPair pair = magnetics::discretize(calibrated_geometry());
    CHECK(magnetics::mutual_filament(pair.tx, pair.rx) == magnetics::mutual_filament(pair.rx, pair.tx));

    CouplerGeometry g = calibrated_geometry();
    g.dx = 0.013;
    g.dy = 0.037;
    g.rxTurnsPerLeg = 5;
    const CoilPair off = magnetics::discretize(g);
    CHECK(magnetics::mutual_filament(off.tx, off.rx) == magnetics::mutual_filament(off.rx, off.tx));
    const FilamentLoop a{{0.01, -0.02, 0.3}, {0.0, 0.6, 0.8}, 0.05, 1};
    const FilamentLoop b{{-0.03, 0.04, 0.1}, {0.0, 0.0, 1.0}, 0.07, -1};
    CHECK(magnetics::loop_mutual(a, b) == magnetics::loop_mutual(b, a));
}

TEST_CASE("far-field decay") {
    const double r = 0.1;
    const FilamentCoil a{{loop_at(0.0, 0.0, 0.0, r)}};
    const FilamentCoil far{{loop_at(0.0, 0.0, 1e3 * r, r)}};
    const double scale = magnetics::self_inductance(a, 1e-3);
    CHECK(std::abs(magnetics::mutual_filament(a, far)) < 1e-9 * scale);

    CouplerGeometry g = calibrated_geometry();
    g.dx = 1.0;
    CHECK(magnetics::coupling_coefficient(g) < 0.01);
}

TEST_CASE("mutual inductance is additive over loops") {
    const CoilPair pair = magnetics::discretize(calibrated_geometry());
    FilamentCoil doubled = pair.tx;
    doubled.loops.insert(doubled.loops.end(), pair.tx.loops.begin(), pair.tx.loops.end());
    CHECK(magnetics::mutual_filament(doubled, pair.rx) ==
          Approx(2.0 * magnetics::mutual_filament(pair.tx, pair.rx)).epsilon(1e-14));
}

TEST_CASE("contour refinement at the anchor geometry") {
    CouplerGeometry g = calibrated_geometry();
    g.dx = 0.010;
    g.dy = 0.050;
    const CoilPair pair = magnetics::discretize(g);
    auto total = [&](int n) {
        double m = 0.0;
        for (const auto& a : pair.tx.loops) {
            for (const auto& b : pair.rx.loops) m += magnetics::loop_mutual_neumann(a, b, n);
        }
        return m;
    };
    const double m128 = total(128);
    CHECK(std::abs(total(256) / m128 - 1.0) < 0.002);
    CHECK(magnetics::mutual_filament(pair.tx, pair.rx) == Approx(m128).epsilon(0.002));
}

TEST_CASE("self inductance") {
    // Single loop: mu0 R (ln(8R/a) - 7/4).
    const FilamentCoil one{{loop_at(0.0, 0.0, 0.0, 0.05)}};
    CHECK(magnetics::self_inductance(one, 1e-3) ==
          Approx(magnetics::kMu0 * 0.05 * (std::log(400.0) - 1.75)).epsilon(1e-14));
    CHECK(magnetics::self_inductance(one, 1e-3, 3.0) ==
          Approx(3.0 * magnetics::self_inductance(one, 1e-3)).epsilon(1e-14));

    // Tightly wound short coil scales as N^2.
    const double l5 = magnetics::self_inductance(dense_coil(5, 4e-3, 0.05), 2e-4);
    const double l10 = magnetics::self_inductance(dense_coil(10, 4e-3, 0.05), 2e-4);
    CHECK(l10 / l5 == Approx(4.0).epsilon(0.10));

    // Series-aiding pieces: L(A+B) = L(A) + L(B) + 2 M(A, B).
    const FilamentCoil a{{loop_at(0.0, 0.0, 0.0, 0.05), loop_at(0.0, 0.0, 0.01, 0.05)}};
    const FilamentCoil b{{loop_at(0.2, 0.0, 0.0, 0.05), loop_at(0.2, 0.0, 0.01, 0.05)}};
    FilamentCoil ab = a;
    ab.loops.insert(ab.loops.end(), b.loops.begin(), b.loops.end());
    CHECK(magnetics::self_inductance(ab, 1e-3) ==
          Approx(magnetics::self_inductance(a, 1e-3) + magnetics::self_inductance(b, 1e-3) +
                 2.0 * magnetics::mutual_filament(a, b))
              .epsilon(1e-12));

    CHECK_THROWS_AS(magnetics::self_inductance(one, 0.05), DomainError);
    CHECK_THROWS_AS(magnetics::self_inductance(one, 0.0), DomainError);
    CHECK_THROWS_AS(magnetics::mutual_filament(one, one), SingularityError);
}

TEST_CASE("rod demagnetization") {
    CHECK(magnetics::demagnetizing_factor(1.0) == Approx(1.0 / 3.0));
    CHECK(magnetics::demagnetizing_factor(1.0 + 1e-6) == Approx(1.0 / 3.0).epsilon(1e-5));
    CHECK(magnetics::demagnetizing_factor(1.0 - 1e-6) == Approx(1.0 / 3.0).epsilon(1e-5));
    double prev = 1.0;
    for (double m : {0.1, 0.5, 2.0, 10.0, 38.6, 100.0}) {
        const double n = magnetics::demagnetizing_factor(m);
        CHECK(n > 0.0);
        CHECK(n < prev);
        prev = n;
    }
    CHECK(magnetics::rod_apparent_permeability(1.0, 20.0) == Approx(1.0));
    CHECK(magnetics::rod_apparent_permeability(1e9, 38.6) ==
          Approx(1.0 / magnetics::demagnetizing_factor(38.6)).epsilon(1e-6));
}

TEST_CASE("discretization") {
    CouplerGeometry g;
    g.rxTurnsPerLeg = 10;
    const CoilPair pair = magnetics::discretize(g);
    CHECK(pair.rx.loops.size() == 20);
    CHECK(pair.tx.loops.size() == 2);

    double zmin = 1e9, zmax = -1e9;
    for (std::size_t i = 0; i < 10; ++i) {
        const auto& l = pair.rx.loops[i];
        const auto& m = pair.rx.loops[i + 10];
        CHECK(l.center.x == -m.center.x);
        CHECK(l.center.z == m.center.z);
        zmin = std::min(zmin, l.center.z);
        zmax = std::max(zmax, l.center.z);
    }
    CHECK(zmin == Approx(0.010));
    CHECK(zmax - zmin == Approx(0.328));
    CHECK(pair.tx.loops[0].center.x == -pair.tx.loops[1].center.x);
    CHECK(pair.rx.loops[0].radius == Approx(8.5e-3 / 2.0 + 1.5e-3));
}

TEST_CASE("geometry validation") {
    CouplerGeometry g;
    CHECK_NOTHROW(magnetics::validate(g));
    g.txRodSpacing = 0.13;
    CHECK_THROWS_AS(magnetics::validate(g), GeometryError);
    g = {};
    g.rxFerriteDiameter = -1.0;
    CHECK_THROWS_AS(magnetics::analyze(g), GeometryError);
    g = {};
    g.airGap = 0.0;
    CHECK_THROWS_AS(magnetics::discretize(g), GeometryError);
    g = {};
    g.dx = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(magnetics::validate(g), GeometryError);
    g = {};
    g.muEffRx = 0.5;
    CHECK_THROWS_AS(magnetics::validate(g), GeometryError);
}

TEST_CASE("calibrated coupler reproduces the anchors") {
    CouplerGeometry g = calibrated_geometry();
    const CouplerInductances aligned = magnetics::analyze(g);
    CHECK(aligned.k == Approx(0.38).epsilon(0.02 / 0.38));
    CHECK(aligned.kUnclamped < 1.0);
    CHECK(aligned.L1 == Approx(19.5e-6).epsilon(0.15));
    CHECK(aligned.L2 == Approx(5.5e-6).epsilon(0.15));
    CHECK(aligned.k == Approx(aligned.M / std::sqrt(aligned.L1 * aligned.L2)));

    g.dx = 0.010;
    g.dy = 0.050;
    CHECK(std::abs(magnetics::coupling_coefficient(g) - 0.26) < 0.05);
}

TEST_CASE("coupling trends") {
    const CouplerGeometry g = calibrated_geometry();
    const auto offsets = grid(0.0, 0.005, 11);
    for (SweepVariable v : {SweepVariable::Dx, SweepVariable::Dy}) {
        const SweepTable t = magnetics::geometry_sweep(g, v, offsets);
        const auto k = t.column("k");
        for (std::size_t i = 1; i < k.size(); ++i) CHECK(k[i] <= k[i - 1]);
    }
    const auto diameters = grid(6e-3, 1e-3, 7);
    const auto lengths = grid(0.2, 0.025, 9);
    for (auto [v, values] : {std::pair{SweepVariable::RxFerriteDiameter, diameters},
                             std::pair{SweepVariable::RxFerriteLength, lengths}}) {
        const SweepTable t = magnetics::geometry_sweep(g, v, values);
        const auto k = t.column("k");
        for (std::size_t i = 0; i < k.size(); ++i) CHECK(t.ok(i));
        for (std::size_t i = 1; i < k.size(); ++i) CHECK(k[i] >= k[i - 1]);
    }

    const std::vector<double> single{0.0};
    const SweepTable one = magnetics::geometry_sweep(g, SweepVariable::Dx, single);
    REQUIRE(one.row_count() == 1);
    CHECK(one.row(0)[1] == magnetics::coupling_coefficient(g));
    CHECK(one.columns().front() == "dx_m");

    const std::vector<double> descending{0.01, 0.0};
    CHECK_THROWS_AS(magnetics::geometry_sweep(g, SweepVariable::Dx, descending), DomainError);

    const std::vector<double> withBad{-1.0, 8.5e-3};
    const SweepTable partial = magnetics::geometry_sweep(g, SweepVariable::RxFerriteDiameter, withBad);
    CHECK_FALSE(partial.ok(0));
    CHECK(partial.ok(1));
}

TEST_CASE("sweep variable names") {
    for (SweepVariable v : {SweepVariable::Dx, SweepVariable::Dy, SweepVariable::RxFerriteDiameter,
                            SweepVariable::RxFerriteLength}) {
        std::string name = magnetics::sweep_variable_name(v);
        name = name.substr(0, name.size() - 2);
        CHECK(magnetics::parse_sweep_variable(name) == v);
    }
    CHECK_THROWS_AS(magnetics::parse_sweep_variable("dz"), DomainError);
}

TEST_CASE("calibration") {
    SUBCASE("single anchor is fitted exactly") {
        const std::vector<CalibrationAnchor> anchors{{CouplerGeometry{}, 0.38}};
        const CalibrationResult r = magnetics::calibrate(anchors);
        CHECK(r.residual < 1e-6);
        CouplerGeometry g;
        g.muEffTx = r.muEffTx;
        g.muEffRx = r.muEffRx;
        CHECK(magnetics::coupling_coefficient(g) == Approx(0.38).epsilon(1e-5));
    }
    SUBCASE("anchor already met at unit factors") {
        const double kAir = magnetics::coupling_coefficient(CouplerGeometry{});
        const std::vector<CalibrationAnchor> anchors{{CouplerGeometry{}, kAir}};
        const CalibrationResult r = magnetics::calibrate(anchors);
        CHECK(r.muEffTx == 1.0);
        CHECK(r.muEffRx == 1.0);
        CHECK(r.iterations == 0);
    }
    SUBCASE("factors stored in the anchors are ignored") {
        CouplerGeometry seeded;
        seeded.muEffTx = 50.0;
        const std::vector<CalibrationAnchor> a{{CouplerGeometry{}, 0.38}};
        const std::vector<CalibrationAnchor> b{{seeded, 0.38}};
        const CalibrationResult ra = magnetics::calibrate(a);
        const CalibrationResult rb = magnetics::calibrate(b);
        CHECK(ra.muEffTx == rb.muEffTx);
        CHECK(ra.muEffRx == rb.muEffRx);
    }
    SUBCASE("anchor with inductance targets") {
        const std::vector<CalibrationAnchor> anchors{{CouplerGeometry{}, 0.38}};
        const CalibrationResult r = magnetics::calibrate(anchors, {19.5e-6, 5.5e-6});
        CHECK(r.muEffTx == Approx(34.8298371).epsilon(1e-6));
        CHECK(r.muEffRx == Approx(160.853397).epsilon(1e-6));
        CHECK(r.residual < 0.02);
        CHECK(r.objective >= r.residual * r.residual);
    }
    SUBCASE("two anchors") {
        CouplerGeometry off;
        off.dx = 0.010;
        off.dy = 0.050;
        const std::vector<CalibrationAnchor> anchors{{CouplerGeometry{}, 0.38}, {off, 0.26}};
        const CalibrationResult r = magnetics::calibrate(anchors, {19.5e-6, 5.5e-6});
        CouplerGeometry g;
        g.muEffTx = r.muEffTx;
        g.muEffRx = r.muEffRx;
        CHECK(std::abs(magnetics::coupling_coefficient(g) - 0.38) < 0.05);
        off.muEffTx = r.muEffTx;
        off.muEffRx = r.muEffRx;
        CHECK(std::abs(magnetics::coupling_coefficient(off) - 0.26) < 0.05);
        CHECK(r.residual > 0.0);
    }
    SUBCASE("invalid input") {
        CHECK_THROWS_AS(magnetics::calibrate({}), DomainError);
        const std::vector<CalibrationAnchor> bad{{CouplerGeometry{}, 1.0}};
        CHECK_THROWS_AS(magnetics::calibrate(bad), DomainError);
    }
}
