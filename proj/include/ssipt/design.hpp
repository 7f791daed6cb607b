#pragma once

#include "ssipt/circuit.hpp"
#include "ssipt/magnetics.hpp"
#include "ssipt/sweep_table.hpp"

#include <span>
#include <string>
#include <vector>

namespace ssipt {

struct DesignSpec {
    double I1maxZeroK = 4.5;   // A rms
    double targetPout = 50.0;  // W
    double kNominal = 0.38;
    double kMin = 0.26;
    double kMax = 0.38;
    bool zvsRequired = true;
    double bandLow = 0.9;      // nominal Pout must reach bandLow * target
    double bandHigh = 1.5;     // no grid point may exceed bandHigh * target
    int kGridPoints = 7;

    bool operator==(const DesignSpec&) const = default;
};

struct DetuningChoice {
    double C1 = 0.0;  // F
    double f1 = 0.0;  // Hz
};

struct DesignResult {
    double C1 = 0.0;
    double f1 = 0.0;
    double I1zeroK = 0.0;      // A rms
    double PoutNominal = 0.0;  // W
    double PoutMax = 0.0;      // W, over kNominal and the k grid
    bool zvsAll = false;       // k = 0, kNominal and every grid point
    bool feasible = false;
    std::vector<std::string> reasons;  // one per violated constraint
};

namespace design {

/// Throws DomainError for an inconsistent spec.
void validate(const DesignSpec& spec);

/// C1 giving exactly I1max at zero coupling with inductive detuning.
/// Throws InfeasibleError when the needed reactance reaches wL1.
DetuningChoice min_detuning_for_current_cap(const CircuitParams& params, double I1max);

/// The k grid evaluate_design walks: kGridPoints evenly spaced values over
/// [kMin, kMax], or the single value when the range is a point.
std::vector<double> k_grid(const DesignSpec& spec);

/// Solver failures are reported as infeasible with the error as reason.
DesignResult evaluate_design(const CircuitParams& params, const DesignSpec& spec);

/// Rows dx_m, dy_m, k, pout_W, i1_Arms, zvs, feasible over the dx x dy grid
/// (dx outer). Feasibility is evaluate_design at the row's k with a point
/// k range.
SweepTable misalignment_envelope(const CircuitParams& params, const CouplerGeometry& geometry,
                                 std::span<const double> dxGrid, std::span<const double> dyGrid,
                                 const DesignSpec& spec);

}  // namespace design
}  // namespace ssipt
