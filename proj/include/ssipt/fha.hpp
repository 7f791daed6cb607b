#pragma once

// First-harmonic (phasor) analysis of the series-series link feeding a diode
// bridge and a constant-voltage battery.
//
// The rectifier is a fundamental-frequency voltage source of magnitude
// (2*sqrt(2)/pi)(Vb + 2Vd) held in phase with the secondary current. With
// I2 = a*e^{j*theta} the two mesh equations collapse to
//
//     V1 = e^{j*theta} * (A*a + B),   A = jwM - Z1*Z2/(jwM),   B = -Z1*V2/(jwM)
//
// so |A*a + B| = V1 is a quadratic in a with exactly one positive root when
// V1 > |B|. V1 <= |B| means the induced secondary voltage never reaches the
// battery clamp and the rectifier does not conduct.

#include "ssipt/circuit.hpp"
#include "ssipt/sweep_table.hpp"

#include <optional>
#include <span>

namespace ssipt {

struct OperatingPoint {
    Complex I1;                  // A rms, transmitter coil current (V1 at phase 0)
    Complex I2;                  // A rms, receiver coil current
    double Pout = 0.0;           // W into the battery
    double Pin = 0.0;            // W drawn from the DC source
    double eta = 0.0;
    std::optional<Complex> Zin;  // ohm, undefined when I1 = 0
    bool zvs = false;            // inductive input impedance
    double Idc_out = 0.0;        // A into the battery
    bool rectifierConducting = false;
};

struct LossBudget {
    double copperPrimary = 0.0;
    double copperSecondary = 0.0;
    double rectifier = 0.0;

    double total() const { return copperPrimary + copperSecondary + rectifier; }
};

namespace fha {

/// Closed-form solution of the operating point.
///
/// Throws ResonantShortError when k = 0 and the primary series impedance
/// vanishes (resonant, lossless primary).
OperatingPoint solve_operating_point(const CircuitParams& params);

/// Same operating point found numerically: the rectifier source phase theta
/// is scanned and the aligned condition arg I2(theta) = theta bisected. Slower;
/// kept as an independent route.
struct IterationSettings {
    int scanPoints = 720;
    double tolerance = 1e-14;  // rad
};
OperatingPoint solve_operating_point_iterative(const CircuitParams& params, IterationSettings settings = {});

/// V1/I1. Throws DomainError when I1 is zero.
Complex input_impedance(const CircuitParams& params, const OperatingPoint& op);

/// One row per coupling value: k, pout_W, pin_W, i1_Arms, i2_Arms, eta, zvs.
/// Rows that fail to solve keep their k and carry the error as status.
SweepTable sweep_coupling(const CircuitParams& params, std::span<const double> kGrid);

LossBudget loss_budget(const CircuitParams& params, const OperatingPoint& op);

/// Primary ESR that makes the zero-coupling copper loss equal targetLoss.
/// Picks the low-resistance root of V1^2 R / (R^2 + X1^2) = P.
double calibrate_primary_esr(const CircuitParams& params, double targetLoss);

}  // namespace fha
}  // namespace ssipt
