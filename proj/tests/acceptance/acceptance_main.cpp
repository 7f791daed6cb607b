// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include "ssipt/config.hpp"
#include "ssipt/error.hpp"
#include "ssipt/fha.hpp"
#include "ssipt/magnetics.hpp"
#include "ssipt/report.hpp"
#include "ssipt/transient.hpp"

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <string>
#include <vector>

using namespace ssipt;

namespace {

const std::string kConfigDir = SSIPT_CONFIG_DIR;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

double rel(double a, double b) { return std::abs(a / b - 1.0); }

std::string fmt(const char* pattern, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* pattern, ...) {
    char buf[512];
    va_list args;
    va_start(args, pattern);
    std::vsnprintf(buf, sizeof buf, pattern, args);
    va_end(args);
    return buf;
}

struct Outcome {
    bool pass = true;
    std::vector<std::string> notes;

    void check(bool ok, std::string note) {
        pass = pass && ok;
        notes.push_back((ok ? "" : "!") + std::move(note));
    }
};

// Shipped configuration: reference components plus calibrated parasitics.
const WorkbenchConfig& shipped() {
    static const WorkbenchConfig c = io::load_config(kConfigDir + "/table1.cfg");
    return c;
}

CircuitParams calibrated(double k) {
    CircuitParams p = shipped().circuit;
    p.k = k;
    return p;
}

CircuitParams lossless(double k) {
    CircuitParams p = io::load_config(kConfigDir + "/table1-lossless.cfg").circuit;
    p.k = k;
    return p;
}

CircuitParams retuned(CircuitParams p) {
    p.C1 = circuit::tuning_capacitance(p.L1, p.fs);
    return p;
}

struct TimedRun {
    TransientResult result;
    double seconds = 0.0;
};

// Calibrated steady-state runs, shared between criteria.
const TimedRun& calibrated_run(double k) {
    static std::map<double, TimedRun> cache;
    auto it = cache.find(k);
    if (it == cache.end()) {
        const auto t0 = Clock::now();
        TimedRun r{transient::simulate(calibrated(k), shipped().sim), 0.0};
        r.seconds = seconds_since(t0);
        it = cache.emplace(k, std::move(r)).first;
    }
    return it->second;
}

// Coaxial loops by Maxwell's formula with elliptic integrals from the AGM.
double coaxial_oracle(double a, double b, double d) {
    const double k2 = 4.0 * a * b / ((a + b) * (a + b) + d * d);
    const double k = std::sqrt(k2);
    double x = 1.0, y = std::sqrt(1.0 - k2), c = k, sum = 0.5 * k2, pow2 = 0.5;
    while (std::abs(c) > 1e-16) {
        const double xn = 0.5 * (x + y);
        const double yn = std::sqrt(x * y);
        c = 0.5 * (x - y);
        pow2 *= 2.0;
        sum += pow2 * c * c;
        x = xn;
        y = yn;
    }
    const double K = std::numbers::pi / (2.0 * x);
    const double E = K * (1.0 - sum);
    return magnetics::kMu0 * std::sqrt(a * b) * ((2.0 / k - k) * K - 2.0 / k * E);
}

Outcome resonance_identity() {
    Outcome o;
    const double f = circuit::resonant_frequency(19.5e-6, 26e-9);
    o.check(rel(f, 223.5e3) < 1e-3, fmt("f1 = %.2f kHz (223.5 kHz +/- 0.1%%)", f / 1e3));
    return o;
}

Outcome zero_coupling_current() {
    Outcome o;
    const double ideal = std::abs(fha::solve_operating_point(lossless(0.0)).I1);
    o.check(std::abs(ideal - 5.19) < 0.005, fmt("lossless FHA |I1| = %.4f A (5.19 A)", ideal));
    const double fha = std::abs(fha::solve_operating_point(calibrated(0.0)).I1);
    const TimedRun& run = calibrated_run(0.0);
    o.check(run.result.steady, fmt("transient steady after %d cycles", run.result.cyclesRun));
    const double sim = run.result.metrics.I1rms;
    o.check(rel(sim, fha) < 0.10, fmt("calibrated FHA %.4f A vs transient %.4f A (10%%)", fha, sim));
    o.check(rel(fha, 4.5) < 0.25 && rel(sim, 4.5) < 0.25,
            fmt("vs measured 4.5 A: FHA %+.1f%%, transient %+.1f%% (25%%)", 100 * (fha / 4.5 - 1), 100 * (sim / 4.5 - 1)));
    o.check(run.seconds < 5.0, fmt("transient %.2f s (< 5 s)", run.seconds));
    return o;
}

Outcome zero_coupling_loss() {
    Outcome o;
    const TransientMetrics& m = calibrated_run(0.0).result.metrics;
    const CircuitParams p = calibrated(0.0);
    o.check(rel(m.Ploss, 4.2) < 0.20,
            fmt("simulated loss %.3f W with R1 = %.5g ohm, R2 = %.3g ohm (4.2 W +/- 20%%; calibration reproduction)",
                m.Ploss, p.R1, p.R2));
    return o;
}

Outcome aligned_power() {
    Outcome o;
    const double ideal = fha::solve_operating_point(lossless(0.38)).Pout;
    o.check(rel(ideal, 42.9) < 0.005, fmt("lossless FHA Pout = %.3f W (42.9 W)", ideal));
    o.check(rel(ideal, 48.2) < 0.25, fmt("vs measured 48.2 W: %+.1f%% (25%%)", 100 * (ideal / 48.2 - 1)));
    const double fha = fha::solve_operating_point(calibrated(0.38)).Pout;
    const TimedRun& run = calibrated_run(0.38);
    o.check(run.result.steady, fmt("transient steady after %d cycles", run.result.cyclesRun));
    const double sim = run.result.metrics.Pout;
    o.check(rel(sim, fha) < 0.10, fmt("calibrated FHA %.3f W vs transient %.3f W (10%%)", fha, sim));
    o.check(run.seconds < 10.0, fmt("transient %.2f s (< 10 s)", run.seconds));
    return o;
}

Outcome misaligned_power() {
    Outcome o;
    const double ideal26 = fha::solve_operating_point(lossless(0.26)).Pout;
    const double ideal38 = fha::solve_operating_point(lossless(0.38)).Pout;
    o.check(rel(ideal26, 62.0) < 0.005, fmt("lossless FHA Pout(0.26) = %.3f W (62.0 W)", ideal26));
    o.check(rel(ideal26, 67.93) < 0.15, fmt("vs measured 67.93 W: %+.1f%% (15%%)", 100 * (ideal26 / 67.93 - 1)));
    o.check(ideal26 > ideal38, fmt("FHA lossless Pout(0.26) %.2f W > Pout(0.38) %.2f W", ideal26, ideal38));
    const double fha26 = fha::solve_operating_point(calibrated(0.26)).Pout;
    const double fha38 = fha::solve_operating_point(calibrated(0.38)).Pout;
    o.check(fha26 > fha38, fmt("FHA calibrated %.2f W > %.2f W", fha26, fha38));
    const TimedRun& r26 = calibrated_run(0.26);
    const TimedRun& r38 = calibrated_run(0.38);
    o.check(r26.result.steady && r38.result.steady, "both transient runs steady");
    o.check(r26.result.metrics.Pout > r38.result.metrics.Pout,
            fmt("transient %.2f W > %.2f W", r26.result.metrics.Pout, r38.result.metrics.Pout));
    return o;
}

Outcome efficiency() {
    Outcome o;
    const double sim = calibrated_run(0.38).result.metrics.eta;
    const double fha = fha::solve_operating_point(calibrated(0.38)).eta;
    o.check(std::abs(sim - 0.882) <= 0.05, fmt("transient eta = %.2f%% (88.2 +/- 5 points)", 100 * sim));
    o.check(std::abs(fha - 0.882) <= 0.05, fmt("FHA eta = %.2f%%", 100 * fha));
    return o;
}

Outcome zvs_flags() {
    Outcome o;
    for (double k : {0.0, 0.38, 0.26}) {
        const bool phasor = fha::solve_operating_point(calibrated(k)).zvs;
        const TransientResult& r = calibrated_run(k).result;
        const bool sim = r.steady && transient::zvs_check(r);
        o.check(phasor && sim, fmt("k = %.2f: FHA zvs %s, transient zvs %s (margin %.3f A)", k, phasor ? "true" : "false",
                                   sim ? "true" : "false", r.metrics.zvsMarginA.value_or(NAN)));
    }
    const TransientResult r = transient::simulate(retuned(calibrated(0.38)), shipped().sim);
    const bool sim = r.steady && transient::zvs_check(r);
    o.check(r.steady && !sim, fmt("retuned f1 = fs, k = 0.38: transient zvs %s (margin %.3f A)", sim ? "true" : "false",
                                  r.metrics.zvsMarginA.value_or(NAN)));
    return o;
}

Outcome fault_modes() {
    Outcome o;
    try {
        transient::simulate(retuned(lossless(0.0)), shipped().sim);
        o.check(false, "retuned lossless k = 0 run finished without a divergence error");
    } catch (const DivergenceError& e) {
        o.check(true, std::string("retuned lossless k = 0: ") + e.what());
    }
    const TransientResult r = transient::simulate(lossless(0.0), shipped().sim);
    double peak = 0.0;
    for (const auto& s : r.samples) peak = std::max(peak, std::abs(s.x.iL1));
    const double bound = 2.0 * std::numbers::sqrt2 * std::abs(fha::solve_operating_point(lossless(0.0)).I1);
    o.check(peak < bound, fmt("detuned lossless k = 0 completes, peak |i1| %.2f A (< %.2f A)", peak, bound));
    return o;
}

Outcome coupler_anchors() {
    Outcome o;
    const WorkbenchConfig& cfg = shipped();
    const CouplerGeometry base = *cfg.geometry;
    const auto& spec = cfg.calibration.anchors.front();
    CouplerGeometry anchorGeometry = base;
    anchorGeometry.dx = spec.dx;
    anchorGeometry.dy = spec.dy;
    const std::vector<CalibrationAnchor> anchors{{anchorGeometry, spec.k}};
    const CalibrationResult fit = magnetics::calibrate(anchors, {cfg.calibration.l1Target, cfg.calibration.l2Target});

    CouplerGeometry g = base;
    g.muEffTx = fit.muEffTx;
    g.muEffRx = fit.muEffRx;
    const double k0 = magnetics::coupling_coefficient(g);
    o.check(std::abs(k0 - 0.38) <= 0.02, fmt("single-anchor fit muTx %.4g, muRx %.4g: k(0, 0) = %.4f (0.38 +/- 0.02)",
                                             fit.muEffTx, fit.muEffRx, k0));
    CouplerGeometry off = g;
    off.dx = 0.010;
    off.dy = 0.050;
    const double k1 = magnetics::coupling_coefficient(off);
    o.check(std::abs(k1 - 0.26) <= 0.05, fmt("k(10 mm, 50 mm) = %.4f (0.26 +/- 0.05)", k1));

    struct Trend {
        SweepVariable variable;
        const std::vector<double>& grid;
        int sign;  // +1 non-decreasing, -1 non-increasing
    };
    for (const Trend& t : {Trend{SweepVariable::Dx, cfg.sweep.dxGrid, -1}, Trend{SweepVariable::Dy, cfg.sweep.dyGrid, -1},
                           Trend{SweepVariable::RxFerriteDiameter, cfg.sweep.ferriteDiameterGrid, +1},
                           Trend{SweepVariable::RxFerriteLength, cfg.sweep.ferriteLengthGrid, +1}}) {
        const SweepTable table = magnetics::geometry_sweep(g, t.variable, t.grid);
        const auto k = table.column("k");
        bool monotone = true;
        for (std::size_t i = 0; i < k.size(); ++i) monotone = monotone && table.ok(i);
        for (std::size_t i = 1; i < k.size(); ++i) monotone = monotone && t.sign * (k[i] - k[i - 1]) >= 0.0;
        o.check(monotone, fmt("%s: k %.4f -> %.4f over %zu points, %s", magnetics::sweep_variable_name(t.variable),
                              k.front(), k.back(), k.size(), t.sign > 0 ? "non-decreasing" : "non-increasing"));
    }
    return o;
}

Outcome numerical_properties(Clock::time_point suiteStart) {
    Outcome o;

    const FilamentLoop a{{0.0, 0.0, 0.0}, {0.0, 0.0, 1.0}, 0.1, 1};
    const FilamentLoop b{{0.0, 0.0, 0.1}, {0.0, 0.0, 1.0}, 0.1, 1};
    const double oracle = coaxial_oracle(0.1, 0.1, 0.1);
    const double contour = magnetics::loop_mutual_neumann(a, b, 128);
    const double closed = magnetics::loop_mutual(a, b);
    o.check(rel(contour, oracle) < 0.005 && rel(closed, oracle) < 0.005,
            fmt("coaxial loops: contour %+.2e, closed form %+.2e relative to the elliptic oracle (0.5%%)",
                contour / oracle - 1, closed / oracle - 1));

    double worstAudit = 0.0, worstRaw = 0.0;
    for (double k : {0.0, 0.26, 0.38}) worstAudit = std::max(worstAudit, calibrated_run(k).result.metrics.energyResidual);
    for (double k : {0.26, 0.38}) worstRaw = std::max(worstRaw, calibrated_run(k).result.metrics.energyImbalance);
    o.check(worstAudit < 0.005 && worstRaw < 0.005,
            fmt("energy audit: %.2e after stored-energy change, %.2e raw for coupled runs (0.5%%)", worstAudit, worstRaw));

    SimOptions fixed;
    fixed.maxCycles = 20;
    fixed.stopWhenSteady = false;
    auto final_i1 = [&](int steps) {
        fixed.stepsPerCycle = steps;
        return transient::simulate(calibrated(0.0), fixed).finalState.iL1;
    };
    const double ref = final_i1(3200);
    const double e200 = std::abs(final_i1(200) - ref);
    const double e400 = std::abs(final_i1(400) - ref);
    const double e800 = std::abs(final_i1(800) - ref);
    o.check(e200 / e400 > 8.0 && e400 / e800 > 8.0,
            fmt("RK4 step halving: error ratios %.1f, %.1f (> 8)", e200 / e400, e400 / e800));

    double worstPhase = 0.0;
    for (int i = 1; i < 90; ++i) {
        for (const CircuitParams& p : {lossless(0.01 * i), calibrated(0.01 * i)}) {
            const OperatingPoint closedForm = fha::solve_operating_point(p);
            if (!closedForm.rectifierConducting) continue;
            const OperatingPoint iterated = fha::solve_operating_point_iterative(p);
            const double d = std::remainder(std::arg(closedForm.I2) - std::arg(iterated.I2), 2.0 * std::numbers::pi);
            worstPhase = std::max(worstPhase, std::abs(d));
        }
    }
    o.check(worstPhase < 1e-6, fmt("FHA phase constraint residual %.2e rad (< 1e-6)", worstPhase));

    const SweepTable sweep = fha::sweep_coupling(calibrated(0.38), shipped().sweep.kGrid);
    const std::string first = io::to_csv(sweep);
    const std::string second = io::to_csv(fha::sweep_coupling(calibrated(0.38), shipped().sweep.kGrid));
    o.check(first == second, fmt("k-sweep CSV byte-identical across runs (%zu bytes)", first.size()));

    const double elapsed = seconds_since(suiteStart);
    o.check(elapsed < 120.0, fmt("suite runtime %.1f s (< 120 s)", elapsed));
    return o;
}

}  // namespace

int main() {
    const auto start = Clock::now();
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"resonance identity", resonance_identity},
        {"zero-coupling current cap", zero_coupling_current},
        {"zero-coupling loss calibration", zero_coupling_loss},
        {"well-aligned power", aligned_power},
        {"misaligned power and non-monotonicity", misaligned_power},
        {"efficiency", efficiency},
        {"ZVS flags", zvs_flags},
        {"fault modes", fault_modes},
        {"coupler anchors and trends", coupler_anchors},
        {"numerical property suite", [start] { return numerical_properties(start); }},
    };

    int failures = 0;
    int index = 0;
    for (const auto& [name, run] : criteria) {
        ++index;
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o.check(false, std::string("exception: ") + e.what());
        }
        std::printf("%s %2d %s\n", o.pass ? "PASS" : "FAIL", index, name);
        for (const auto& n : o.notes) std::printf("        %s\n", n.c_str());
        failures += o.pass ? 0 : 1;
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
