#include "ssipt/fha.hpp"

#include "ssipt/error.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace ssipt::fha {

namespace {

constexpr Complex j{0.0, 1.0};

// Relative floor on |Z1| (against wL1) below which a decoupled primary is
// treated as a short.
constexpr double kShortFloor = 1e-9;

OperatingPoint finalize(const CircuitParams& p, const DerivedParams& d, Complex I1, Complex I2, bool conducting) {
    OperatingPoint op;
    op.I1 = I1;
    op.I2 = I2;
    op.rectifierConducting = conducting;
    op.Idc_out = conducting ? circuit::kSquareFundamental * std::abs(I2) : 0.0;
    op.Pout = p.Vb * op.Idc_out;
    const double losses = std::norm(I1) * p.R1 + std::norm(I2) * p.R2 + 2.0 * p.Vd * op.Idc_out;
    op.Pin = op.Pout + losses;
    op.eta = op.Pin > 0.0 ? op.Pout / op.Pin : 0.0;
    if (std::abs(I1) > 0.0) {
        op.Zin = Complex(d.V1rms, 0.0) / I1;
        op.zvs = op.Zin->imag() > 0.0;
    }
    return op;
}

OperatingPoint no_load(const CircuitParams& p, const DerivedParams& d, Complex Z1) {
    if (d.V1rms == 0.0) return finalize(p, d, {}, {}, false);
    return finalize(p, d, Complex(d.V1rms, 0.0) / Z1, {}, false);
}

void check_short(const CircuitParams& p, const DerivedParams& d, Complex Z1) {
    if (p.k == 0.0 && std::abs(Z1) < kShortFloor * d.omega_s * p.L1) {
        throw ResonantShortError(
            "resonant short-circuit: primary series LC is at resonance with no coupled load");
    }
}

}  // namespace

OperatingPoint solve_operating_point(const CircuitParams& p) {
    const DerivedParams d = circuit::derive(p);
    const Complex Z1{p.R1, d.X1};
    const Complex Z2{p.R2, d.X2};
    check_short(p, d, Z1);

    const double wM = d.omega_s * d.M;
    if (wM == 0.0 || d.V1rms == 0.0) return no_load(p, d, Z1);

    const Complex jwM = j * wM;
    const Complex A = jwM - Z1 * Z2 / jwM;
    const Complex B = -Z1 * d.V2rms / jwM;

    // Rectifier conducts only if the open-circuit induced voltage exceeds the clamp.
    if (d.V1rms <= std::abs(B)) return no_load(p, d, Z1);

    const double a2 = std::norm(A);
    const double beta = (A * std::conj(B)).real();
    const double c = std::norm(B) - d.V1rms * d.V1rms;  // < 0 here
    double a = 0.0;
    if (a2 <= std::numeric_limits<double>::min()) {
        if (beta <= 0.0) return no_load(p, d, Z1);
        a = -c / (2.0 * beta);
    } else {
        const double disc = std::sqrt(beta * beta - a2 * c);
        a = beta > 0.0 ? -c / (beta + disc) : (disc - beta) / a2;
    }

    const double theta = -std::arg(A * a + B);
    const Complex phase = std::polar(1.0, theta);
    const Complex I2 = a * phase;
    const Complex I1 = -(Z2 * a + d.V2rms) * phase / jwM;
    return finalize(p, d, I1, I2, true);
}

OperatingPoint solve_operating_point_iterative(const CircuitParams& p, IterationSettings s) {
    if (s.scanPoints < 8 || !(s.tolerance > 0.0)) throw DomainError("invalid phase search settings");
    const DerivedParams d = circuit::derive(p);
    const Complex Z1{p.R1, d.X1};
    const Complex Z2{p.R2, d.X2};
    check_short(p, d, Z1);

    const double wM = d.omega_s * d.M;
    if (wM == 0.0 || d.V1rms == 0.0) return no_load(p, d, Z1);

    const Complex jwM = j * wM;
    const Complex det = Z1 * Z2 - jwM * jwM;
    const Complex V1{d.V1rms, 0.0};
    const auto secondary = [&](double theta) { return (-Z1 * std::polar(d.V2rms, theta) - jwM * V1) / det; };
    // Phase of I2 ahead of the rectifier source; zero at the operating point.
    const auto mismatch = [&](double theta) {
        return std::remainder(std::arg(secondary(theta)) - theta, 2.0 * std::numbers::pi);
    };

    const double pi = std::numbers::pi;
    double best = std::numeric_limits<double>::quiet_NaN();
    double bestResidual = std::numeric_limits<double>::infinity();
    double lo = -pi;
    double glo = mismatch(lo);
    for (int i = 1; i <= s.scanPoints; ++i) {
        double hi = -pi + 2.0 * pi * i / s.scanPoints;
        double ghi = mismatch(hi);
        // A sign change across a +/-pi wrap is not a root.
        if ((glo <= 0.0) != (ghi <= 0.0) && std::abs(glo - ghi) < pi) {
            double a = lo, b = hi, ga = glo;
            while (b - a > s.tolerance) {
                const double m = 0.5 * (a + b);
                const double gm = mismatch(m);
                if ((gm <= 0.0) == (ga <= 0.0)) {
                    a = m;
                    ga = gm;
                } else {
                    b = m;
                }
            }
            const double root = 0.5 * (a + b);
            const double r = std::abs(mismatch(root));
            if (r < bestResidual) {
                bestResidual = r;
                best = root;
            }
        }
        lo = hi;
        glo = ghi;
    }

    if (std::isfinite(best) && bestResidual < 1e-9 && std::abs(secondary(best)) > 0.0) {
        const Complex Vac = std::polar(d.V2rms, best);
        return finalize(p, d, (Z2 * V1 + jwM * Vac) / det, secondary(best), true);
    }
    // No aligned phase: the rectifier stays blocked.
    const Complex B = -Z1 * d.V2rms / jwM;
    if (d.V1rms <= std::abs(B)) return no_load(p, d, Z1);
    throw DomainError("phase search found no aligned operating point");
}

Complex input_impedance(const CircuitParams& p, const OperatingPoint& op) {
    if (std::abs(op.I1) == 0.0) throw DomainError("input impedance undefined: zero primary current");
    return Complex(circuit::fundamental_rms(p.Vdc), 0.0) / op.I1;
}

SweepTable sweep_coupling(const CircuitParams& params, std::span<const double> kGrid) {
    for (std::size_t i = 0; i < kGrid.size(); ++i) {
        if (!(kGrid[i] >= 0.0 && kGrid[i] < 1.0)) throw DomainError("k grid values must lie in [0, 1)");
        if (i > 0 && !(kGrid[i] > kGrid[i - 1])) throw DomainError("k grid must be strictly ascending");
    }
    SweepTable table({"k", "pout_W", "pin_W", "i1_Arms", "i2_Arms", "eta", "zvs"});
    for (double k : kGrid) {
        CircuitParams p = params;
        p.k = k;
        try {
            const OperatingPoint op = solve_operating_point(p);
            table.add_row({k, op.Pout, op.Pin, std::abs(op.I1), std::abs(op.I2), op.eta, op.zvs ? 1.0 : 0.0});
        } catch (const std::exception& e) {
            table.add_failed_row(k, e.what());
        }
    }
    return table;
}

LossBudget loss_budget(const CircuitParams& p, const OperatingPoint& op) {
    LossBudget b;
    b.copperPrimary = std::norm(op.I1) * p.R1;
    b.copperSecondary = std::norm(op.I2) * p.R2;
    b.rectifier = 2.0 * p.Vd * op.Idc_out;
    return b;
}

double calibrate_primary_esr(const CircuitParams& p, double targetLoss) {
    if (!(targetLoss > 0.0)) throw DomainError("target loss must be positive");
    const DerivedParams d = circuit::derive(p);
    const double v2 = d.V1rms * d.V1rms;
    const double x = std::abs(d.X1);
    if (x == 0.0) return v2 / targetLoss;
    // P(R) peaks at R = |X1| with P = V1^2 / (2|X1|).
    if (targetLoss > v2 / (2.0 * x)) {
        throw InfeasibleError("target zero-coupling loss exceeds the maximum V1^2/(2|X1|)");
    }
    const double disc = std::sqrt(v2 * v2 - 4.0 * targetLoss * targetLoss * x * x);
    // Small root of P R^2 - V1^2 R + P X1^2 = 0, written without cancellation.
    return 2.0 * targetLoss * x * x / (v2 + disc);
}

}  // namespace ssipt::fha
