#pragma once

// Electrical description of the series-series compensated IPT link and the
// closed-form relations every analysis builds on. All quantities are SI.

#include <complex>
#include <numbers>

namespace ssipt {

using Complex = std::complex<double>;

/// Full electrical description of the link: full-bridge source, the two
/// series-compensated coils, parasitics and the battery clamp.
struct CircuitParams {
    double Vdc = 29.0;        // V, DC bus
    double Vb = 11.1;         // V, battery
    double fs = 245e3;        // Hz, switching frequency
    double L1 = 19.5e-6;      // H
    double L2 = 5.5e-6;       // H
    double C1 = 26e-9;        // F
    double C2 = 80e-9;        // F
    double k = 0.38;
    double R1 = 0.0;          // ohm, primary loop ESR
    double R2 = 0.0;          // ohm, secondary loop ESR
    double Vd = 0.0;          // V, per-diode forward drop
    double deadTime = 0.0;    // s, inverter dead time (time domain only)

    bool operator==(const CircuitParams&) const = default;
};

/// Quantities derived from CircuitParams at the switching frequency.
struct DerivedParams {
    double omega_s = 0.0;  // rad/s
    double f1 = 0.0;       // Hz
    double f2 = 0.0;       // Hz
    double M = 0.0;        // H
    double X1 = 0.0;       // ohm, positive when the primary is inductively detuned
    double X2 = 0.0;       // ohm
    double V1rms = 0.0;    // V, inverter fundamental
    double V2rms = 0.0;    // V, rectifier-input fundamental incl. diode drops
};

namespace circuit {

/// 2*sqrt(2)/pi: rms of the fundamental of a unit square wave.
inline constexpr double kSquareFundamental = 2.0 * std::numbers::sqrt2 / std::numbers::pi;

double resonant_frequency(double L, double C);
double mutual_inductance(double k, double L1, double L2);

/// Signed reactance wL - 1/(wC) of a series LC at frequency f.
double series_reactance(double L, double C, double f);

/// RMS fundamental of a +/-Vsquare square wave.
double fundamental_rms(double Vsquare);

/// Throws DomainError naming the first violated invariant.
void validate(const CircuitParams& p);

DerivedParams derive(const CircuitParams& p);

/// Capacitor that puts the series resonance of L exactly at f.
double tuning_capacitance(double L, double f);

}  // namespace circuit
}  // namespace ssipt
