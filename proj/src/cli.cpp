#include "ssipt/cli.hpp"

#include "ssipt/design.hpp"
#include "ssipt/error.hpp"
#include "ssipt/fha.hpp"
#include "ssipt/magnetics.hpp"
#include "ssipt/report.hpp"
#include "ssipt/transient.hpp"

#include <array>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>

namespace ssipt::cli {

namespace {

constexpr std::array<const char*, 7> kCommands{"analyze", "simulate", "sweep-k", "sweep-misalign",
                                               "coupler", "design",   "calibrate"};

__attribute__((format(printf, 2, 3))) void say(std::ostream& out, const char* pattern, ...) {
    char buf[512];
    va_list args;
    va_start(args, pattern);
    std::vsnprintf(buf, sizeof buf, pattern, args);
    va_end(args);
    out << buf << '\n';
}

const char* yes_no(bool b) { return b ? "true" : "false"; }

struct Context {
    const WorkbenchConfig& cfg;
    const std::filesystem::path& dir;
    std::ostream& out;

    void write(const SweepTable& table, const std::string& stem, const PlotSpec& plot) const {
        if (cfg.output.csv) {
            io::emit_csv(table, dir / (stem + ".csv"));
            say(out, "wrote %s", (dir / (stem + ".csv")).string().c_str());
        }
        if (cfg.output.svg) {
            io::emit_svg(table, plot, dir / (stem + ".svg"));
            say(out, "wrote %s", (dir / (stem + ".svg")).string().c_str());
        }
    }
};

const CouplerGeometry& need_geometry(const WorkbenchConfig& cfg, const char* command) {
    if (!cfg.geometry) throw ConfigError(std::string(command) + " needs a [geometry] section");
    return *cfg.geometry;
}

void print_operating_point(std::ostream& out, const CircuitParams& p, const OperatingPoint& op) {
    say(out, "  k              %.4g", p.k);
    say(out, "  |I1|           %.4f A rms  (angle %.2f deg)", std::abs(op.I1), std::arg(op.I1) * 180.0 / std::numbers::pi);
    say(out, "  |I2|           %.4f A rms", std::abs(op.I2));
    say(out, "  Pout           %.3f W", op.Pout);
    say(out, "  Pin            %.3f W", op.Pin);
    say(out, "  eta            %.4f", op.eta);
    if (op.Zin) {
        say(out, "  Zin            %.4f %+.4fj ohm", op.Zin->real(), op.Zin->imag());
    } else {
        say(out, "  Zin            undefined (I1 = 0)");
    }
    say(out, "  zvs            %s", yes_no(op.zvs));
    say(out, "  Idc_out        %.4f A", op.Idc_out);
    say(out, "  rectifier      %s", op.rectifierConducting ? "conducting" : "blocking (no load)");
}

int analyze(const Context& c) {
    const CircuitParams& p = c.cfg.circuit;
    const DerivedParams d = circuit::derive(p);
    say(c.out, "derived");
    say(c.out, "  f1             %.2f kHz", d.f1 / 1e3);
    say(c.out, "  f2             %.2f kHz", d.f2 / 1e3);
    say(c.out, "  X1             %.4f ohm", d.X1);
    say(c.out, "  X2             %.4f ohm", d.X2);
    say(c.out, "  M              %.4f uH", d.M * 1e6);
    say(c.out, "  V1             %.4f V rms", d.V1rms);
    say(c.out, "  V2             %.4f V rms", d.V2rms);
    const OperatingPoint op = fha::solve_operating_point(p);
    say(c.out, "operating point");
    print_operating_point(c.out, p, op);
    const LossBudget loss = fha::loss_budget(p, op);
    say(c.out, "losses");
    say(c.out, "  copper primary   %.3f W", loss.copperPrimary);
    say(c.out, "  copper secondary %.3f W", loss.copperSecondary);
    say(c.out, "  rectifier        %.3f W", loss.rectifier);
    say(c.out, "  total            %.3f W", loss.total());
    return 0;
}

int simulate(const Context& c) {
    const TransientResult r = transient::simulate(c.cfg.circuit, c.cfg.sim);
    const TransientMetrics& m = r.metrics;
    say(c.out, "transient (%d cycles, %s)", r.cyclesRun, r.steady ? "steady" : "not steady");
    say(c.out, "  I1rms          %.4f A", m.I1rms);
    say(c.out, "  I2rms          %.4f A", m.I2rms);
    say(c.out, "  Pout           %.3f W", m.Pout);
    say(c.out, "  Pin            %.3f W", m.Pin);
    say(c.out, "  Ploss          %.3f W", m.Ploss);
    say(c.out, "  eta            %.4f", m.eta);
    say(c.out, "  THD(i1)        %.4f", m.thdI1);
    say(c.out, "  i1 lag         %.2f deg", m.i1LagDeg);
    say(c.out, "  energy audit   %.2e", m.energyImbalance);
    if (m.zvsMarginA) {
        say(c.out, "  zvs margin     %.4f A", *m.zvsMarginA);
        say(c.out, "  zvs            %s", yes_no(transient::zvs_check(r)));
    } else {
        say(c.out, "  zvs            undetermined (run did not settle)");
    }
    const int n = std::min(c.cfg.exportCycles, r.retainedCycles);
    c.write(transient::waveform_export(r, n), "waveform", {"Bridge and coil waveforms", {"i_l1_A", "i_l2_A"}});
    return 0;
}

std::vector<double> grid_or(const std::vector<double>& grid, std::vector<double> fallback) {
    return grid.empty() ? fallback : grid;
}

std::vector<double> millimetre_range(double stopMm, double stepMm) {
    std::vector<double> g;
    for (int i = 0; i * stepMm <= stopMm + 1e-9; ++i) g.push_back(i * stepMm * 1e-3);
    return g;
}

int sweep_k(const Context& c) {
    std::vector<double> fallback;
    for (int i = 0; i <= 45; ++i) fallback.push_back(i * 0.02);
    const auto grid = grid_or(c.cfg.sweep.kGrid, fallback);
    const SweepTable t = fha::sweep_coupling(c.cfg.circuit, grid);
    std::size_t best = 0;
    for (std::size_t i = 0; i < t.row_count(); ++i) {
        if (t.ok(i) && t.row(i)[1] > t.row(best)[1]) best = i;
    }
    say(c.out, "k sweep: %zu rows, peak Pout %.3f W at k = %.4g", t.row_count(), t.row(best)[1], t.row(best)[0]);
    c.write(t, "sweep_k", {"Output power vs coupling", {"pout_W"}});
    return 0;
}

int sweep_misalign(const Context& c) {
    const CouplerGeometry& g = need_geometry(c.cfg, "sweep-misalign");
    const auto dx = grid_or(c.cfg.sweep.dxGrid, millimetre_range(50, 5));
    const auto dy = grid_or(c.cfg.sweep.dyGrid, millimetre_range(50, 5));
    const SweepTable tx = magnetics::geometry_sweep(g, SweepVariable::Dx, dx);
    const SweepTable ty = magnetics::geometry_sweep(g, SweepVariable::Dy, dy);
    say(c.out, "k vs dx: %.4f -> %.4f over %zu points", tx.row(0)[1], tx.row(tx.row_count() - 1)[1], tx.row_count());
    say(c.out, "k vs dy: %.4f -> %.4f over %zu points", ty.row(0)[1], ty.row(ty.row_count() - 1)[1], ty.row_count());
    c.write(tx, "misalign_dx", {"Coupling vs dx", {"k"}});
    c.write(ty, "misalign_dy", {"Coupling vs dy", {"k"}});
    if (c.cfg.design) {
        const SweepTable env = design::misalignment_envelope(c.cfg.circuit, g, dx, dy, *c.cfg.design);
        std::size_t feasible = 0;
        for (std::size_t i = 0; i < env.row_count(); ++i) feasible += env.ok(i) && env.row(i)[6] == 1.0;
        say(c.out, "envelope: %zu of %zu points feasible", feasible, env.row_count());
        if (c.cfg.output.csv) {
            io::emit_csv(env, c.dir / "envelope.csv");
            say(c.out, "wrote %s", (c.dir / "envelope.csv").string().c_str());
        }
    }
    return 0;
}

int coupler(const Context& c) {
    const CouplerGeometry& g = need_geometry(c.cfg, "coupler");
    const CouplerInductances r = magnetics::analyze(g);
    say(c.out, "coupler (dx = %.1f mm, dy = %.1f mm)", g.dx * 1e3, g.dy * 1e3);
    say(c.out, "  L1             %.4f uH  (air %.4f uH x %.4g)", r.L1 * 1e6, r.L1air * 1e6, r.muTx);
    say(c.out, "  L2             %.4f uH  (air %.4f uH x %.4g)", r.L2 * 1e6, r.L2air * 1e6, r.muRx);
    say(c.out, "  M              %.4f uH  (air %.5f uH)", r.M * 1e6, r.Mair * 1e6);
    say(c.out, "  k              %.4f", r.k);
    if (!c.cfg.sweep.ferriteDiameterGrid.empty()) {
        const auto t = magnetics::geometry_sweep(g, SweepVariable::RxFerriteDiameter, c.cfg.sweep.ferriteDiameterGrid);
        c.write(t, "coupler_diameter", {"Coupling vs ferrite diameter", {"k"}});
    }
    if (!c.cfg.sweep.ferriteLengthGrid.empty()) {
        const auto t = magnetics::geometry_sweep(g, SweepVariable::RxFerriteLength, c.cfg.sweep.ferriteLengthGrid);
        c.write(t, "coupler_length", {"Coupling vs ferrite length", {"k"}});
    }
    return 0;
}

void print_design(std::ostream& out, const DesignResult& r) {
    say(out, "  C1             %.4f nF", r.C1 * 1e9);
    say(out, "  f1             %.3f kHz", r.f1 / 1e3);
    say(out, "  I1 (k = 0)     %.4f A rms", r.I1zeroK);
    say(out, "  Pout nominal   %.3f W", r.PoutNominal);
    say(out, "  Pout max       %.3f W", r.PoutMax);
    say(out, "  zvs all        %s", yes_no(r.zvsAll));
    say(out, "  feasible       %s", yes_no(r.feasible));
    for (const auto& reason : r.reasons) say(out, "    - %s", reason.c_str());
}

int run_design(const Context& c) {
    if (!c.cfg.design) throw ConfigError("design needs a [design] section");
    const DesignSpec& spec = *c.cfg.design;
    say(c.out, "as configured");
    print_design(c.out, design::evaluate_design(c.cfg.circuit, spec));

    const DetuningChoice choice = design::min_detuning_for_current_cap(c.cfg.circuit, spec.I1maxZeroK);
    CircuitParams p = c.cfg.circuit;
    p.C1 = choice.C1;
    const DesignResult r = design::evaluate_design(p, spec);
    say(c.out, "minimum detuning for the %.3g A cap", spec.I1maxZeroK);
    print_design(c.out, r);
    if (!r.feasible) {
        say(c.out, "infeasible: no detuning meets the spec");
        return 1;
    }
    return 0;
}

int calibrate(const Context& c) {
    const CouplerGeometry& g = need_geometry(c.cfg, "calibrate");
    const auto& cal = c.cfg.calibration;
    if (cal.anchors.empty()) throw ConfigError("calibrate needs at least one anchor in [calibration]");
    std::vector<CalibrationAnchor> anchors;
    for (const auto& a : cal.anchors) {
        CouplerGeometry ag = g;
        ag.dx = a.dx;
        ag.dy = a.dy;
        anchors.push_back({ag, a.k});
    }
    const CalibrationResult r = magnetics::calibrate(anchors, {cal.l1Target, cal.l2Target});
    say(c.out, "calibration (%d sweeps)", r.iterations);
    say(c.out, "  mu_eff_tx      %.9g", r.muEffTx);
    say(c.out, "  mu_eff_rx      %.9g", r.muEffRx);
    say(c.out, "  k residual     %.3e", r.residual);
    for (const auto& a : anchors) {
        CouplerGeometry fitted = a.geometry;
        fitted.muEffTx = r.muEffTx;
        fitted.muEffRx = r.muEffRx;
        const CouplerInductances v = magnetics::analyze(fitted);
        say(c.out, "  anchor dx = %.1f mm dy = %.1f mm: k = %.4f (target %.4f), L1 = %.3f uH, L2 = %.3f uH",
            a.geometry.dx * 1e3, a.geometry.dy * 1e3, v.k, a.kTarget, v.L1 * 1e6, v.L2 * 1e6);
    }
    return 0;
}

}  // namespace

bool is_command(const std::string& name) {
    for (const char* c : kCommands) {
        if (name == c) return true;
    }
    return false;
}

std::filesystem::path output_directory(const WorkbenchConfig& cfg, const std::optional<std::string>& outFlag) {
    if (outFlag && !outFlag->empty()) return *outFlag;
    if (const char* env = std::getenv("SSIPT_OUT"); env && *env) return env;
    return cfg.output.directory;
}

int dispatch(const std::string& command, const WorkbenchConfig& cfg, const std::filesystem::path& outDir,
             std::ostream& out, std::ostream& err) {
    if (!is_command(command)) {
        err << "unknown command '" << command << "'\n" << kUsage;
        return 2;
    }
    const Context c{cfg, outDir, out};
    try {
        if (command == "analyze") return analyze(c);
        if (command == "simulate") return simulate(c);
        if (command == "sweep-k") return sweep_k(c);
        if (command == "sweep-misalign") return sweep_misalign(c);
        if (command == "coupler") return coupler(c);
        if (command == "design") return run_design(c);
        return calibrate(c);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace ssipt::cli
