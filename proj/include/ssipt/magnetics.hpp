#pragma once

// Coupler magnetics: air-core filament model of the two-rod transmitter and
// the two-leg solenoid receiver, with ferrite folded in as permeability
// multipliers.
//
// Frame: z is vertical (up from the transmitter top face), x runs along the
// rod-spacing axis, y is the other horizontal direction. Transmitter rods
// stand at x = +/- txRodSpacing/2 and occupy z in [-txRodLength, 0]. The
// receiver legs hang vertically at x = +/- rxLegSpacing/2 + dx, y = dy and
// occupy z in [airGap, airGap + rxFerriteLength].

#include "ssipt/sweep_table.hpp"

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace ssipt {

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
};

struct FilamentLoop {
    Vec3 center;
    Vec3 axis{0.0, 0.0, 1.0};  // unit
    double radius = 0.0;        // m
    int currentSense = 1;       // +1 or -1
};

struct FilamentCoil {
    std::vector<FilamentLoop> loops;
};

struct CouplerGeometry {
    double txRodDiameter = 0.130;      // m
    double txRodLength = 0.080;        // m
    int txTurnsPerRod = 1;
    double txWireRadius = 3e-3;        // m
    double txRodSpacing = 0.200;       // m, centre to centre
    double rxFerriteDiameter = 8.5e-3; // m
    double rxFerriteLength = 0.328;    // m
    int rxTurnsPerLeg = 2;
    double rxWireRadius = 1.5e-3;      // m
    double rxLegSpacing = 0.200;       // m
    double airGap = 0.010;             // m
    double dx = 0.0;                   // m, along the rod-spacing axis
    double dy = 0.0;                   // m, horizontal, across the rod-spacing axis
    double muEffTx = 1.0;              // transmitter inductance multiplier
    double muEffRx = 1.0;              // receiver rod material permeability

    bool operator==(const CouplerGeometry&) const = default;
};

struct CoilPair {
    FilamentCoil tx;
    FilamentCoil rx;
};

/// Air-core values, the ferrite factors applied to them, and the result.
struct CouplerInductances {
    double L1air = 0.0;  // H
    double L2air = 0.0;  // H
    double Mair = 0.0;   // H
    double muTx = 1.0;   // factor on L1
    double muRx = 1.0;   // apparent rod permeability, factor on L2
    double L1 = 0.0;     // H
    double L2 = 0.0;     // H
    double M = 0.0;      // H
    double kUnclamped = 0.0;
    double k = 0.0;      // clamped to [0, 1)
};

enum class SweepVariable { Dx, Dy, RxFerriteDiameter, RxFerriteLength };

struct CalibrationAnchor {
    CouplerGeometry geometry;
    double kTarget = 0.0;
};

/// Optional self-inductance targets. When set they enter the fit as a weak
/// log-error penalty so the two factors are not left degenerate.
struct InductanceTargets {
    std::optional<double> L1;  // H
    std::optional<double> L2;  // H
};

struct CalibrationResult {
    double muEffTx = 1.0;
    double muEffRx = 1.0;
    double residual = 0.0;     // sqrt of sum (k - kTarget)^2
    double objective = 0.0;    // including any inductance penalty
    int iterations = 0;        // outer coordinate-descent sweeps
};

namespace magnetics {

inline constexpr double kMu0 = 4e-7 * 3.14159265358979323846;

/// Throws GeometryError naming the first violated constraint.
void validate(const CouplerGeometry& g);

/// One filament per physical turn at rod radius plus wire radius. A single
/// turn sits at mid-rod; more turns are spread end to end.
CoilPair discretize(const CouplerGeometry& g);

/// Closed-form mutual inductance of two coaxial circular loops.
double loop_mutual_coaxial(double radiusA, double radiusB, double separation);

/// Neumann double-contour integral with the given segment count per loop.
double loop_mutual_neumann(const FilamentLoop& a, const FilamentLoop& b, int segments);

/// Mutual inductance of one loop pair: closed form when coaxial, otherwise
/// contour integration at 64/128 segments with a 256-segment fallback when
/// those two disagree by more than 0.5%.
double loop_mutual(const FilamentLoop& a, const FilamentLoop& b);

/// Air-core mutual inductance of two coils, summed pairwise. Symmetric in its
/// arguments to the last bit.
double mutual_filament(const FilamentCoil& a, const FilamentCoil& b);

/// muEff times the air-core self inductance: per-loop self terms plus all
/// intra-coil mutuals. Throws DomainError if wireRadius >= any loop radius.
double self_inductance(const FilamentCoil& coil, double wireRadius, double muEff = 1.0);

/// Magnetometric demagnetizing factor of a spheroid with length/diameter m.
double demagnetizing_factor(double aspect);

/// Permeability seen by a winding on a finite rod of material permeability mu.
double rod_apparent_permeability(double mu, double aspect);

CouplerInductances analyze(const CouplerGeometry& g);

double coupling_coefficient(const CouplerGeometry& g);

/// Rows (value, k, l1_H, l2_H) over an ascending grid; rows that fail keep
/// their value and carry the error as status. Rows run in parallel.
SweepTable geometry_sweep(const CouplerGeometry& g, SweepVariable variable, std::span<const double> grid);

const char* sweep_variable_name(SweepVariable v);
SweepVariable parse_sweep_variable(const std::string& name);

/// Least-squares fit of (muEffTx, muEffRx) by coordinate descent with
/// golden-section line searches in log space, starting from (1, 1). The
/// factors stored in the anchor geometries are ignored. Throws
/// CalibrationError after 500 outer sweeps.
CalibrationResult calibrate(std::span<const CalibrationAnchor> anchors, const InductanceTargets& targets = {});

}  // namespace magnetics
}  // namespace ssipt
