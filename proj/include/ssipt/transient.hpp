#pragma once

// Switched time-domain model: full-bridge square-wave source, the two
// series-compensated coupled tanks, a diode bridge and a constant-voltage
// battery. Fixed-step RK4 with bisection onto diode events; inverter edges
// always fall on step boundaries.

#include "ssipt/circuit.hpp"
#include "ssipt/sweep_table.hpp"

#include <optional>
#include <vector>

namespace ssipt {

struct StateVector {
    double iL1 = 0.0;  // A
    double iL2 = 0.0;  // A
    double vC1 = 0.0;  // V
    double vC2 = 0.0;  // V
};

struct WaveformSample {
    double t = 0.0;        // s
    double vBridge = 0.0;  // V
    StateVector x;
    double vRect = 0.0;    // V, rectifier input (open-circuit value while blocking)
    double iBattery = 0.0; // A, DC side
};

/// Measured over the final simulated cycle.
struct TransientMetrics {
    double I1rms = 0.0;
    double I2rms = 0.0;
    double Pout = 0.0;
    double Pin = 0.0;
    double Ploss = 0.0;
    double copperPrimary = 0.0;    // W
    double copperSecondary = 0.0;  // W
    double rectifierLoss = 0.0;    // W
    double eta = 0.0;
    std::optional<double> zvsMarginA;  // set only for steady runs
    double thdI1 = 0.0;
    double i1LagDeg = 0.0;          // fundamental of iL1 behind the bridge fundamental
    double energyImbalance = 0.0;   // |Ein - Eout - Eloss| / Ein over the cycle
    double energyResidual = 0.0;    // same, after removing the change in stored energy
};

struct TransientResult {
    std::vector<WaveformSample> samples;  // retained trailing cycles, oldest first
    int samplesPerCycle = 0;
    int retainedCycles = 0;
    bool steady = false;
    int cyclesRun = 0;
    double period = 0.0;  // s
    StateVector finalState;
    TransientMetrics metrics;
};

struct SimOptions {
    int maxCycles = 2000;
    int stepsPerCycle = 1000;
    double steadyTolerance = 1e-4;  // relative cycle-to-cycle change
    int steadyCycles = 3;           // consecutive cycles below tolerance
    bool stopWhenSteady = true;
    int retainCycles = 4;
    double divergenceLimit = 1e6;   // A or V
    double eventResolution = 1e-12; // s

    bool operator==(const SimOptions&) const = default;
};

namespace transient {

/// Starts from rest. Throws DivergenceError when the state exceeds the limit
/// or, for runs that never settle, when the per-cycle current peak is still
/// growing at an undiminished rate over the final 100 cycles.
TransientResult simulate(const CircuitParams& params, const SimOptions& options = {});
TransientResult simulate(const CircuitParams& params, int maxCycles, int stepsPerCycle);

/// 0.5 (L1 i1^2 + 2 M i1 i2 + L2 i2^2 + C1 vC1^2 + C2 vC2^2).
double stored_energy(const CircuitParams& params, const StateVector& x);

/// True when every inverter transition in the final cycle sees the bridge
/// current in the commutating direction with at least 1% of I1rms.
/// Throws PreconditionError for a run that did not reach steady state.
bool zvs_check(const TransientResult& result);

/// Rows t_s, v_bridge_V, i_l1_A, v_c1_V, i_l2_A, v_rect_V for the last
/// n cycles. Throws PreconditionError if fewer cycles were retained.
SweepTable waveform_export(const TransientResult& result, int lastNCycles);

}  // namespace transient
}  // namespace ssipt
