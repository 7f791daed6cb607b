#include "ssipt/transient.hpp"

#include "ssipt/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdio>
#include <deque>
#include <numbers>
#include <string>

namespace ssipt::transient {

namespace {

// Circuit state followed by running integrals that RK4 carries along so the
// cycle energies come out at the same order as the state itself.
enum Slot {
    kI1,
    kI2,
    kVC1,
    kVC2,
    kEin,
    kEout,
    kEdiode,
    kEr1,
    kEr2,
    kQ1,
    kQ2,
    kI1Cos,
    kI1Sin,
    kVCos,
    kVSin,
    kSlots
};
using State = std::array<double, kSlots>;
constexpr int kCircuitSlots = 4;

struct Model {
    double L1, L2, M, det, R1, R2, C1, C2, Vb, Vd, Vc, omega;

    // Rectifier state r: +1/-1 conducting with that current sign, 0 blocking.
    State deriv(const State& x, double t, double vbr, int r) const {
        State d{};
        const double v1 = vbr - x[kVC1] - R1 * x[kI1];
        if (r == 0) {
            d[kI1] = v1 / L1;
            d[kI2] = 0.0;
        } else {
            const double v2 = -x[kVC2] - R2 * x[kI2] - r * Vc;
            d[kI1] = (L2 * v1 - M * v2) / det;
            d[kI2] = (L1 * v2 - M * v1) / det;
        }
        d[kVC1] = x[kI1] / C1;
        d[kVC2] = x[kI2] / C2;
        const double idc = r == 0 ? 0.0 : r * x[kI2];
        d[kEin] = vbr * x[kI1];
        d[kEout] = Vb * idc;
        d[kEdiode] = 2.0 * Vd * idc;
        d[kEr1] = R1 * x[kI1] * x[kI1];
        d[kEr2] = R2 * x[kI2] * x[kI2];
        d[kQ1] = x[kI1] * x[kI1];
        d[kQ2] = x[kI2] * x[kI2];
        const double c = std::cos(omega * t), s = std::sin(omega * t);
        d[kI1Cos] = x[kI1] * c;
        d[kI1Sin] = x[kI1] * s;
        d[kVCos] = vbr * c;
        d[kVSin] = vbr * s;
        return d;
    }

    // Rectifier-input voltage with the secondary current held at zero.
    double open_voltage(const State& x, double vbr) const {
        const double v1 = vbr - x[kVC1] - R1 * x[kI1];
        return -x[kVC2] - M * v1 / L1;
    }

    State rk4(const State& x, double t, double h, double vbr, int r) const {
        const State k1 = deriv(x, t, vbr, r);
        State y;
        for (int i = 0; i < kSlots; ++i) y[i] = x[i] + 0.5 * h * k1[i];
        const State k2 = deriv(y, t + 0.5 * h, vbr, r);
        for (int i = 0; i < kSlots; ++i) y[i] = x[i] + 0.5 * h * k2[i];
        const State k3 = deriv(y, t + 0.5 * h, vbr, r);
        for (int i = 0; i < kSlots; ++i) y[i] = x[i] + h * k3[i];
        const State k4 = deriv(y, t + h, vbr, r);
        State out;
        for (int i = 0; i < kSlots; ++i) out[i] = x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        return out;
    }
};

// Bridge voltage on [t, next breakpoint) within one period.
double bridge_voltage(double tLocal, double T, double td, double Vdc) {
    const double half = T / 2.0;
    if (tLocal < half - td) return Vdc;
    if (tLocal < half) return 0.0;
    if (tLocal < T - td) return -Vdc;
    return 0.0;
}

class Integrator {
public:
    Integrator(const Model& m, double resolution) : m_(m), resolution_(resolution) {}

    int rectifier() const { return r_; }

    // Advances x by h with the bridge voltage fixed, stopping at each diode
    // transition found on the way.
    void advance(State& x, double t0, double h, double vbr) {
        double done = 0.0;
        int events = 0;
        while (h - done > 1e-9 * h) {
            if (r_ == 0) engage_if_forward(x, vbr);
            const double t = t0 + done;
            const double rest = h - done;
            const State y = m_.rk4(x, t, rest, vbr, r_);
            if (events >= kMaxEventsPerStep || !crossed(y, vbr)) {
                x = y;
                return;
            }
            double lo = 0.0, hi = rest;
            while (hi - lo > resolution_) {
                const double mid = 0.5 * (lo + hi);
                if (crossed(m_.rk4(x, t, mid, vbr, r_), vbr)) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            x = m_.rk4(x, t, hi, vbr, r_);
            done += hi;
            ++events;
            if (r_ != 0) {
                // Current reached zero: the conducting pair turns off.
                x[kI2] = 0.0;
                r_ = 0;
            }
        }
        if (r_ == 0) engage_if_forward(x, vbr);
    }

    double rectifier_voltage(const State& x, double vbr) const {
        return r_ == 0 ? m_.open_voltage(x, vbr) : r_ * m_.Vc;
    }

    void settle(State& x, double vbr) {
        if (r_ == 0) engage_if_forward(x, vbr);
    }

private:
    static constexpr int kMaxEventsPerStep = 16;

    bool crossed(const State& y, double vbr) const {
        if (r_ != 0) return r_ * y[kI2] < 0.0;
        return std::abs(m_.open_voltage(y, vbr)) > m_.Vc;
    }

    void engage_if_forward(const State& x, double vbr) {
        const double v = m_.open_voltage(x, vbr);
        if (std::abs(v) > m_.Vc) r_ = v > 0.0 ? 1 : -1;
    }

    const Model& m_;
    double resolution_;
    int r_ = 0;
};

struct CycleRecord {
    State start{};
    State end{};
    std::array<double, kCircuitSlots> peak{};
    double peakI1 = 0.0;
    // i1 at the four inverter transitions: +V off, -V on, -V off, +V on.
    std::array<double, 4> switchCurrent{};
};

StateVector to_state_vector(const State& x) { return {x[kI1], x[kI2], x[kVC1], x[kVC2]}; }

void check_bounded(const State& x, double limit, double t) {
    for (int i = 0; i < kCircuitSlots; ++i) {
        if (!std::isfinite(x[i]) || std::abs(x[i]) > limit) {
            char buf[128];
            std::snprintf(buf, sizeof buf, "state diverged at t = %.6g s (|x| > %.3g)", t, limit);
            throw DivergenceError(buf);
        }
    }
}

// Peak current still rising every cycle at an undiminished rate: the
// undamped resonant build-up that would only trip the absolute limit after
// far more cycles than a run allows.
bool secular_growth(const std::vector<double>& peaks) {
    constexpr std::size_t kWindow = 100;
    if (peaks.size() < kWindow + 1) return false;
    const std::size_t first = peaks.size() - kWindow;
    double early = 0.0, late = 0.0;
    for (std::size_t i = first; i < peaks.size(); ++i) {
        const double inc = peaks[i] - peaks[i - 1];
        if (!(inc > 0.0)) return false;
        (i - first < kWindow / 2 ? early : late) += inc;
    }
    return late >= 0.99 * early;
}

TransientMetrics cycle_metrics(const CycleRecord& c, double T, double storedChange) {
    TransientMetrics m;
    const State& e = c.end;
    m.I1rms = std::sqrt(e[kQ1] / T);
    m.I2rms = std::sqrt(e[kQ2] / T);
    m.Pin = e[kEin] / T;
    m.Pout = e[kEout] / T;
    m.copperPrimary = e[kEr1] / T;
    m.copperSecondary = e[kEr2] / T;
    m.rectifierLoss = e[kEdiode] / T;
    m.Ploss = m.copperPrimary + m.copperSecondary + m.rectifierLoss;
    m.eta = m.Pin > 0.0 ? m.Pout / m.Pin : 0.0;
    if (std::abs(e[kEin]) > 0.0) {
        const double balance = e[kEin] - e[kEout] - e[kEdiode] - e[kEr1] - e[kEr2];
        m.energyImbalance = std::abs(balance) / std::abs(e[kEin]);
        m.energyResidual = std::abs(balance - storedChange) / std::abs(e[kEin]);
    }
    // x(t) ~ a cos wt + b sin wt has phasor a - jb in the cosine reference.
    const std::complex<double> i1(2.0 / T * e[kI1Cos], -2.0 / T * e[kI1Sin]);
    const std::complex<double> vb(2.0 / T * e[kVCos], -2.0 / T * e[kVSin]);
    const double fund = std::abs(i1) / std::numbers::sqrt2;
    if (fund > 0.0) {
        m.thdI1 = std::sqrt(std::max(0.0, m.I1rms * m.I1rms - fund * fund)) / fund;
        if (std::abs(vb) > 0.0) {
            m.i1LagDeg = std::remainder(std::arg(vb) - std::arg(i1), 2.0 * std::numbers::pi) * 180.0 / std::numbers::pi;
        }
    }
    return m;
}

}  // namespace

double stored_energy(const CircuitParams& p, const StateVector& x) {
    const double M = circuit::mutual_inductance(p.k, p.L1, p.L2);
    return 0.5 * (p.L1 * x.iL1 * x.iL1 + 2.0 * M * x.iL1 * x.iL2 + p.L2 * x.iL2 * x.iL2 + p.C1 * x.vC1 * x.vC1 +
                  p.C2 * x.vC2 * x.vC2);
}

TransientResult simulate(const CircuitParams& p, int maxCycles, int stepsPerCycle) {
    SimOptions o;
    o.maxCycles = maxCycles;
    o.stepsPerCycle = stepsPerCycle;
    return simulate(p, o);
}

TransientResult simulate(const CircuitParams& p, const SimOptions& o) {
    circuit::validate(p);
    if (o.stepsPerCycle < 200) throw DomainError("stepsPerCycle must be at least 200");
    if (o.maxCycles < 1) throw DomainError("maxCycles must be at least 1");
    if (o.retainCycles < 1) throw DomainError("retainCycles must be at least 1");
    if (o.steadyCycles < 1 || !(o.steadyTolerance > 0.0)) throw DomainError("invalid steady-state criterion");

    const double T = 1.0 / p.fs;
    const double M = circuit::mutual_inductance(p.k, p.L1, p.L2);
    const double det = p.L1 * p.L2 - M * M;
    if (!(det > 0.0)) throw DomainError("inductance matrix is singular");
    const Model model{p.L1, p.L2, M, det, p.R1, p.R2, p.C1, p.C2, p.Vb, p.Vd, p.Vb + 2.0 * p.Vd, 2.0 * std::numbers::pi * p.fs};
    Integrator integ(model, o.eventResolution);

    const int N = o.stepsPerCycle;
    const double h = T / N;
    const double td = p.deadTime;
    // Inverter transitions inside the period, in order.
    const std::array<double, 3> breaks{T / 2.0 - td, T / 2.0, T - td};

    TransientResult result;
    result.samplesPerCycle = N;
    result.period = T;

    State x{};
    std::deque<std::vector<WaveformSample>> retained;
    std::vector<double> peaks;
    CycleRecord prev, cur;
    bool havePrev = false;
    int quiet = 0;

    for (int n = 0; n < o.maxCycles; ++n) {
        for (int i = kCircuitSlots; i < kSlots; ++i) x[i] = 0.0;
        cur = CycleRecord{};
        cur.start = x;
        std::vector<WaveformSample> samples;
        samples.reserve(N);

        for (int j = 0; j < N; ++j) {
            const double a = j * h;
            const double b = (j + 1 == N) ? T : (j + 1) * h;
            {
                const double vbr = bridge_voltage(a, T, td, p.Vdc);
                integ.settle(x, vbr);
                WaveformSample s;
                s.t = n * T + a;
                s.vBridge = vbr;
                s.x = to_state_vector(x);
                s.vRect = integ.rectifier_voltage(x, vbr);
                s.iBattery = integ.rectifier() == 0 ? 0.0 : integ.rectifier() * x[kI2];
                samples.push_back(s);
            }
            double t = a;
            auto run_to = [&](double end) {
                if (end - t <= 1e-9 * h) return;
                integ.advance(x, t, end - t, bridge_voltage(t, T, td, p.Vdc));
                t = end;
            };
            for (std::size_t q = 0; q < breaks.size(); ++q) {
                const double br = breaks[q];
                if (br > a + 1e-9 * h && br < b - 1e-9 * h) run_to(br);
                if (std::abs(br - t) <= 1e-9 * h) cur.switchCurrent[q] = x[kI1];
            }
            run_to(b);
            check_bounded(x, o.divergenceLimit, n * T + t);
            for (int i = 0; i < kCircuitSlots; ++i) cur.peak[i] = std::max(cur.peak[i], std::abs(x[i]));
        }
        // Bridge returns to +Vdc at the period boundary.
        cur.switchCurrent[3] = x[kI1];
        if (td == 0.0) cur.switchCurrent[2] = x[kI1];
        cur.end = x;
        cur.peakI1 = cur.peak[kI1];
        peaks.push_back(cur.peakI1);

        retained.push_back(std::move(samples));
        if (static_cast<int>(retained.size()) > o.retainCycles) retained.pop_front();
        result.cyclesRun = n + 1;

        if (havePrev) {
            double worst = 0.0;
            for (int i = 0; i < kCircuitSlots; ++i) {
                const double scale = std::max(cur.peak[i], 1e-12);
                worst = std::max(worst, std::abs(cur.end[i] - prev.end[i]) / scale);
            }
            quiet = worst < o.steadyTolerance ? quiet + 1 : 0;
            if (quiet >= o.steadyCycles) result.steady = true;
        }
        prev = cur;
        havePrev = true;
        if (result.steady && o.stopWhenSteady) break;
    }

    if (!result.steady && secular_growth(peaks)) {
        throw DivergenceError("current grows without bound (undamped resonance); peak |i1| " +
                              std::to_string(peaks.back()) + " A after " + std::to_string(peaks.size()) +
                              " cycles");
    }

    const double storedChange =
        stored_energy(p, to_state_vector(cur.end)) - stored_energy(p, to_state_vector(cur.start));
    result.metrics = cycle_metrics(cur, T, storedChange);
    if (result.steady) {
        const auto& s = cur.switchCurrent;
        result.metrics.zvsMarginA = std::min({s[0], s[1], -s[2], -s[3]});
    }
    result.finalState = to_state_vector(x);
    result.retainedCycles = static_cast<int>(retained.size());
    for (auto& c : retained) result.samples.insert(result.samples.end(), c.begin(), c.end());
    return result;
}

bool zvs_check(const TransientResult& r) {
    if (!r.steady || !r.metrics.zvsMarginA) throw PreconditionError("zvs_check needs a steady-state result");
    return *r.metrics.zvsMarginA >= 0.01 * r.metrics.I1rms;
}

SweepTable waveform_export(const TransientResult& r, int lastNCycles) {
    if (lastNCycles < 1 || lastNCycles > r.retainedCycles) {
        throw PreconditionError("waveform_export: " + std::to_string(lastNCycles) + " cycles requested, " +
                                std::to_string(r.retainedCycles) + " retained");
    }
    SweepTable table({"t_s", "v_bridge_V", "i_l1_A", "v_c1_V", "i_l2_A", "v_rect_V"});
    const std::size_t count = static_cast<std::size_t>(lastNCycles) * r.samplesPerCycle;
    for (std::size_t i = r.samples.size() - count; i < r.samples.size(); ++i) {
        const auto& s = r.samples[i];
        table.add_row({s.t, s.vBridge, s.x.iL1, s.x.vC1, s.x.iL2, s.vRect});
    }
    return table;
}

}  // namespace ssipt::transient
