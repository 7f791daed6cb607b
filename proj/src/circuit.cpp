#include "ssipt/circuit.hpp"

#include "ssipt/error.hpp"

#include <cmath>
#include <string>

namespace ssipt::circuit {

namespace {

void require_positive(double value, const char* name) {
    if (!(value > 0.0) || !std::isfinite(value)) {
        throw DomainError(std::string(name) + " must be strictly positive and finite");
    }
}

void require_non_negative(double value, const char* name) {
    if (!(value >= 0.0) || !std::isfinite(value)) {
        throw DomainError(std::string(name) + " must be non-negative and finite");
    }
}

}  // namespace

double resonant_frequency(double L, double C) {
    require_positive(L, "inductance");
    require_positive(C, "capacitance");
    return 1.0 / (2.0 * std::numbers::pi * std::sqrt(L * C));
}

double mutual_inductance(double k, double L1, double L2) {
    if (!(k >= 0.0 && k < 1.0)) throw DomainError("coupling coefficient k must lie in [0, 1)");
    require_positive(L1, "L1");
    require_positive(L2, "L2");
    return k * std::sqrt(L1 * L2);
}

double series_reactance(double L, double C, double f) {
    require_positive(L, "inductance");
    require_positive(C, "capacitance");
    require_positive(f, "frequency");
    const double w = 2.0 * std::numbers::pi * f;
    return w * L - 1.0 / (w * C);
}

double fundamental_rms(double Vsquare) {
    require_non_negative(Vsquare, "square-wave amplitude");
    return kSquareFundamental * Vsquare;
}

double tuning_capacitance(double L, double f) {
    require_positive(L, "inductance");
    require_positive(f, "frequency");
    const double w = 2.0 * std::numbers::pi * f;
    return 1.0 / (w * w * L);
}

void validate(const CircuitParams& p) {
    require_positive(p.L1, "L1");
    require_positive(p.L2, "L2");
    require_positive(p.C1, "C1");
    require_positive(p.C2, "C2");
    require_positive(p.fs, "fs");
    // Vdc and Vb may be zero for the unexcited and no-battery corner cases.
    require_non_negative(p.Vdc, "Vdc");
    require_non_negative(p.Vb, "Vb");
    require_non_negative(p.R1, "R1");
    require_non_negative(p.R2, "R2");
    require_non_negative(p.Vd, "Vd");
    require_non_negative(p.deadTime, "deadTime");
    if (!(p.k >= 0.0 && p.k < 1.0)) throw DomainError("coupling coefficient k must lie in [0, 1)");
    if (p.deadTime >= 0.5 / p.fs) throw DomainError("deadTime must be shorter than half a switching period");
}

DerivedParams derive(const CircuitParams& p) {
    validate(p);
    DerivedParams d;
    d.omega_s = 2.0 * std::numbers::pi * p.fs;
    d.f1 = resonant_frequency(p.L1, p.C1);
    d.f2 = resonant_frequency(p.L2, p.C2);
    d.M = mutual_inductance(p.k, p.L1, p.L2);
    d.X1 = series_reactance(p.L1, p.C1, p.fs);
    d.X2 = series_reactance(p.L2, p.C2, p.fs);
    d.V1rms = fundamental_rms(p.Vdc);
    d.V2rms = fundamental_rms(p.Vb + 2.0 * p.Vd);
    return d;
}

}  // namespace ssipt::circuit
