// Acceptance gate: one printed pass/fail line per criterion.
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "rydtwin/analysis.hpp"
#include "rydtwin/circuit.hpp"
#include "rydtwin/compiler.hpp"
#include "rydtwin/engine.hpp"
#include "rydtwin/physics.hpp"
#include "rydtwin/scheduler.hpp"

using namespace rydtwin;
using cd = std::complex<double>;

namespace {

int g_failures = 0;

void report(int id, const std::string& name, bool ok, const std::string& detail = "") {
    std::printf("AC%-2d %-52s %s%s%s\n", id, name.c_str(), ok ? "PASS" : "FAIL",
                detail.empty() ? "" : "  ", detail.c_str());
    std::fflush(stdout);
    if (!ok) ++g_failures;
}

void guarded(int id, const std::string& name, const std::function<bool(std::string&)>& fn) {
    std::string detail;
    bool ok = false;
    try {
        ok = fn(detail);
    } catch (const std::exception& e) {
        detail = std::string("exception: ") + e.what();
    }
    report(id, name, ok, detail);
}

CompileRequest req4(double rg2, LatticeKind kind = LatticeKind::square) {
    CompileRequest req;
    req.lattice = {kind, 4, 0, 3.0};
    req.r_g_sq_in_a2 = rg2;
    req.mode = CompileMode::native;
    req.phi = calibrated_device().phi;
    return req;
}

Circuit serial_cz_train(const DeviceParams& dev, int n_cz, double rg2 = 4.0) {
    Circuit c;
    c.level = Level::native;
    c.lattice = {LatticeKind::square, 1, 2, 3.0};
    c.r_g_sq_in_a2 = rg2;
    c.phi = dev.phi;
    for (int i = 0; i < n_cz; ++i) append_layer(c, Layer{{cz_phi(0, 1, dev.phi)}});
    assign_pulse_timeline(c, 0.122);
    return c;
}

// Process infidelity of two parallel CZ pulses on a 4-atom geometry against
// CZ_PHI(phi) x CZ_PHI(phi), via the 16 qubit basis columns.
double parallel_cz_infidelity(const LatticeSpec& spec, int a0, int a1, int b0, int b1,
                              double rg2) {
    const DeviceParams& dev = calibrated_device();
    Circuit c;
    c.level = Level::native;
    c.lattice = spec;
    c.r_g_sq_in_a2 = rg2;
    c.phi = dev.phi;
    append_layer(c, Layer{{cz_phi(a0, a1, dev.phi), cz_phi(b0, b1, dev.phi)}});
    assign_pulse_timeline(c, 0.122);
    const Lattice lat = Lattice::build(spec);
    BackendConfig cfg;
    cfg.dt = 0.00025;
    const int sites[4] = {a0, a1, b0, b1};
    auto diag_phase = [&](int b) {  // CZ_PHI target phase for a 2-bit pattern
        const int hi = (b >> 1) & 1, lo = b & 1;
        if (hi && lo) return 2 * dev.phi - 3.14159265358979323846;
        return (hi || lo) ? dev.phi : 0.0;
    };
    cd tr_m = 0;
    double tr_mmd = 0;
    for (int col = 0; col < 16; ++col) {
        std::vector<int> digits(lat.size(), 0);
        for (int q = 0; q < 4; ++q) digits[sites[q]] = (col >> q) & 1;
        QutritState init = QutritState::basis(lat.size(), digits);
        const QutritState fin = run_pulse(c, lat, dev, cfg, false, &init).final;
        const double phase = diag_phase(col & 3) + diag_phase((col >> 2) & 3);
        for (int row = 0; row < 16; ++row) {
            std::vector<int> rd(lat.size(), 0);
            for (int q = 0; q < 4; ++q) rd[sites[q]] = (row >> q) & 1;
            const cd u = state_overlap(QutritState::basis(lat.size(), rd), fin) *
                         std::sqrt(fin.norm2());
            const cd m = std::polar(1.0, -((row == col) ? phase : 0.0)) * u;
            tr_mmd += std::norm(m);
            if (row == col) tr_m += std::polar(1.0, -phase) * u;
        }
    }
    const double f = (tr_mmd + std::norm(tr_m)) / (16.0 * 17.0);
    return 1 - f;
}

} // namespace

int main() {
    guarded(1, "depth bounds match Table II closed forms", [](std::string& d) {
        const DepthBounds b4 = depth_bounds(4), b6 = depth_bounds(6), b8 = depth_bounds(8);
        d = "L=4 -> (" + std::to_string(b4.d_min) + "," + std::to_string(b4.d_cz_serial) +
            "," + std::to_string(b4.d_serial) + ")";
        return b4.d_min == 23 && b4.d_cz_serial == 30 && b4.d_serial == 168 &&
               b6.d_min == 33 && b6.d_cz_serial == 50 && b6.d_serial == 388 &&
               b8.d_min == 43 && b8.d_cz_serial == 78 && b8.d_serial == 696;
    });

    Circuit sq16;
    guarded(2, "compiled depth: 4x4 square <= 30, hexagonal <= 29",
            [&](std::string& d) {
                const CompileResult sq = compile(req4(8.0));
                const CompileResult hx = compile(req4(4.0, LatticeKind::hexagonal));
                sq16 = sq.circuit;
                d = "square D=" + std::to_string(sq.circuit.depth()) +
                    ", hex D=" + std::to_string(hx.circuit.depth());
                return sq.circuit.depth() <= 30 && hx.circuit.depth() <= 29;
            });

    guarded(3, "compiled circuits prepare exact GHZ targets", [&](std::string& d) {
        char buf[128];
        double worst = 1.0;
        for (int L : {2, 3}) {
            CompileRequest req = req4(8.0);
            req.lattice.rows = L;
            worst = std::min(worst, ghz_fidelity(run_ideal(compile(req).circuit)));
        }
        if (sq16.depth() > 0) worst = std::min(worst, ghz_fidelity(run_ideal(sq16)));
        const std::vector<std::vector<int>> groups = {
            {5, 1, 4, 6, 9}, {7, 3, 11, 2, 10}, {13, 12, 14, 8, 15}};
        const CompileResult rep = compile_local_ghz(req4(4.0), groups);
        worst = std::min(worst, ghz_fidelity_local(run_ideal(rep.circuit), groups));
        std::snprintf(buf, sizeof buf, "worst F = 1 - %.2e (repetition D=%d)",
                      1 - worst, rep.circuit.depth());
        d = buf;
        return worst >= 1 - 1e-10;
    });

    guarded(4, "Table II statistics on the compiled 4x4 circuit", [&](std::string& d) {
        const CircuitStats st = circuit_stats(sq16, 2.0);
        char buf[128];
        std::snprintf(buf, sizeof buf, "O1=%.2f O2=%.2f QGS=%.2e", st.O1, st.O2, st.QGS);
        d = buf;
        return std::abs(st.O1 - 5.5) <= 1.0 && std::abs(st.O2 - 0.5) <= 0.2 &&
               std::abs(st.QGS - 3e6) <= 0.25 * 3e6;
    });

    guarded(5, "CZ calibration reaches F >= 0.9999", [](std::string& d) {
        const DeviceParams& dev = calibrated_device();
        char buf[64];
        std::snprintf(buf, sizeof buf, "F_CZ=%.9f phi=%.6f", dev.f_cz, dev.phi);
        d = buf;
        return dev.f_cz >= 0.9999;
    });

    std::vector<double> xtalk;
    guarded(6, "crosstalk falls >= 2 orders over {sqrt2,2,3,4}a", [&](std::string& d) {
        // pair A in column 0, pair B separated by the stated min cross distance
        xtalk.push_back(parallel_cz_infidelity({LatticeKind::square, 4, 2, 3.0},
                                               0, 2, 5, 7, 2.0));          // sqrt(2) a
        xtalk.push_back(parallel_cz_infidelity({LatticeKind::square, 2, 3, 3.0},
                                               0, 3, 2, 5, 4.0));          // 2a
        xtalk.push_back(parallel_cz_infidelity({LatticeKind::square, 2, 4, 3.0},
                                               0, 4, 3, 7, 9.0));          // 3a
        xtalk.push_back(parallel_cz_infidelity({LatticeKind::square, 2, 5, 3.0},
                                               0, 5, 4, 9, 16.0));         // 4a
        char buf[128];
        std::snprintf(buf, sizeof buf, "I = %.1e, %.1e, %.1e, %.1e", xtalk[0], xtalk[1],
                      xtalk[2], xtalk[3]);
        d = buf;
        return xtalk[0] > xtalk[1] && xtalk[1] > xtalk[2] && xtalk[2] > xtalk[3] &&
               xtalk[0] / xtalk[3] >= 100.0;
    });

    guarded(7, "3x3 pulse GHZ infidelity within the per-gate budget", [](std::string& d) {
        const DeviceParams& dev = calibrated_device();
        CompileRequest req;
        req.lattice = {LatticeKind::square, 3, 0, 3.0};
        req.r_g_sq_in_a2 = 9.0;  // larger than the grid diameter: serial CZs
        req.mode = CompileMode::native;
        req.phi = dev.phi;
        Circuit c = compile(req).circuit;
        assign_pulse_timeline(c, 0.122);
        const Lattice lat = Lattice::build(c.lattice);
        BackendConfig cfg;
        cfg.dt = 0.0005;
        const RunRecord rec = run_pulse(c, lat, dev, cfg, false, nullptr);
        const double infid = 1 - ghz_fidelity(rec.final);
        const double budget = 8 * 10 * (1 - dev.f_cz);
        char buf[96];
        std::snprintf(buf, sizeof buf, "I=%.2e budget=%.2e D=%d", infid, budget,
                      c.depth());
        d = buf;
        return infid <= budget;
    });

    guarded(8, "open-system decay identity and aggregate loss", [](std::string& d) {
        const DeviceParams& dev = calibrated_device();
        const Lattice lat = Lattice::build({LatticeKind::square, 1, 2, 3.0});
        BackendConfig cfg;
        cfg.dt = 0.0005;
        QutritState plus = QutritState::zeros(2);
        for (int i : {0, 1, 3, 4}) plus.amp[i] = 0.5;
        bool identity_ok = true;
        double loss15 = 0;
        for (int n_cz : {1, 3, 15}) {
            const Circuit c = serial_cz_train(dev, n_cz);
            const RunRecord rec = run_pulse(c, lat, dev, cfg, true, &plus);
            const double loss = 1 - rec.final.norm2();
            const double tr = rydberg_observables(rec).t_r;
            if (std::abs(loss - 2 * dev.gamma_rad_us() * tr) > 0.1 * loss)
                identity_ok = false;
            if (n_cz == 15) loss15 = loss;
        }
        char buf[96];
        std::snprintf(buf, sizeof buf, "15-CZ loss=%.3e (paper 1.4e-2)", loss15);
        d = buf;
        return identity_ok && loss15 >= 0.5 * 1.4e-2 && loss15 <= 2.0 * 1.4e-2;
    });

    guarded(9, "T_R additive in CZ count and flat in r_g", [&](std::string& d) {
        const DeviceParams& dev = calibrated_device();
        const Lattice lat = Lattice::build({LatticeKind::square, 1, 2, 3.0});
        BackendConfig cfg;
        cfg.dt = 0.0005;
        QutritState plus = QutritState::zeros(2);
        for (int i : {0, 1, 3, 4}) plus.amp[i] = 0.5;
        double t1 = 0;
        bool additive = true;
        for (int n_cz : {1, 3, 7}) {
            const Circuit c = serial_cz_train(dev, n_cz);
            const double tr =
                rydberg_observables(run_pulse(c, lat, dev, cfg, false, &plus)).t_r;
            if (n_cz == 1) t1 = tr;
            if (std::abs(tr - n_cz * t1) > 0.05 * n_cz * t1) additive = false;
        }
        // r_g only matters through crosstalk; at 3a vs 4a the 4-atom T_R is flat
        const DeviceParams& devc = calibrated_device();
        auto four_atom_tr = [&](const LatticeSpec& spec, int b0, int b1m, double rg2) {
            Circuit c;
            c.level = Level::native;
            c.lattice = spec;
            c.r_g_sq_in_a2 = rg2;
            c.phi = devc.phi;
            append_layer(c, Layer{{cz_phi(0, spec.cols, devc.phi),
                                   cz_phi(b0, b1m, devc.phi)}});
            assign_pulse_timeline(c, 0.122);
            const Lattice l = Lattice::build(spec);
            // |+>^4 on the driven sites, |0> on idle ones
            QutritState init = QutritState::zeros(l.size());
            const int qs[4] = {0, spec.cols, b0, b1m};
            for (int b = 0; b < 16; ++b) {
                long long idx = 0;
                for (int q = 0; q < 4; ++q)
                    if ((b >> q) & 1) {
                        long long p = 1;
                        for (int s = 0; s < qs[q]; ++s) p *= 3;
                        idx += p;
                    }
                init.amp[idx] = 0.25;
            }
            return rydberg_observables(run_pulse(c, l, devc, cfg, false, &init)).t_r;
        };
        const double tr3 = four_atom_tr({LatticeKind::square, 2, 4, 3.0}, 3, 7, 9.0);
        const double tr4 = four_atom_tr({LatticeKind::square, 2, 5, 3.0}, 4, 9, 16.0);
        char buf[96];
        std::snprintf(buf, sizeof buf, "T_R(1)=%.4f us, T_R(3a)/T_R(4a)=%.4f", t1,
                      tr3 / tr4);
        d = buf;
        return additive && std::abs(tr3 - tr4) <= 0.05 * tr4;
    });

    guarded(10, "dephasing closed form and 64-qubit scenario", [](std::string& d) {
        std::mt19937 rng(2026);
        std::uniform_real_distribution<double> ut(0.0, 400.0);
        for (int k = 0; k < 100; ++k) {
            const int n = 1 + int(rng() % 64);
            const double t = ut(rng);
            if (std::abs(dephasing_fidelity(n, t, 10.0) -
                         (0.5 + 0.5 * std::exp(-n * t / 1e4))) > 1e-12)
                return false;
        }
        const double f = dephasing_fidelity(64, 100.0, 10.0);
        char buf[48];
        std::snprintf(buf, sizeof buf, "F_D(64,100us)=%.6f", f);
        d = buf;
        return std::abs(f - 0.7637) <= 1e-4;
    });

    guarded(11, "GHZ16 sampling: 50/50 bins, byte-exact determinism",
            [](std::string& d) {
                const QutritState ghz = ghz_target(16);
                const long long shots = 1000000;
                const Histogram h =
                    sample_measurements(ghz, shots, ReadoutScheme::two_state, 1234);
                const Histogram h2 =
                    sample_measurements(ghz, shots, ReadoutScheme::two_state, 1234);
                const double f0 =
                    double(h.count({16, 0}) ? h.at({16, 0}) : 0) / shots;
                const double f1 =
                    double(h.count({0, 16}) ? h.at({0, 16}) : 0) / shots;
                char buf[64];
                std::snprintf(buf, sizeof buf, "p(16,0)=%.4f p(0,16)=%.4f", f0, f1);
                d = buf;
                return std::abs(f0 - 0.5) <= 0.002 && std::abs(f1 - 0.5) <= 0.002 &&
                       h == h2;
            });

    guarded(12, "norm drift per gate and dt-halving convergence", [](std::string& d) {
        const DeviceParams& dev = calibrated_device();
        const Lattice lat = Lattice::build({LatticeKind::square, 1, 2, 3.0});
        Circuit c;
        c.level = Level::native;
        c.lattice = lat.spec();
        c.phi = dev.phi;
        for (const Gate& g : decompose_cnot_native(0, 1, dev.phi))
            append_layer(c, Layer{{g}});
        assign_pulse_timeline(c, 0.122);
        BackendConfig cfg;
        cfg.dt = 0.001;
        std::mt19937 rng(31);
        std::normal_distribution<double> gauss;
        QutritState init = QutritState::zeros(2);
        for (int a = 0; a < 9; ++a)
            if (a / 3 != 2 && a % 3 != 2) init.amp[a] = cd(gauss(rng), gauss(rng));
        const double nn = std::sqrt(init.norm2());
        for (auto& a : init.amp) a /= nn;
        const RunRecord r1 = run_pulse(c, lat, dev, cfg, false, &init);
        const double drift = std::abs(r1.final.norm2() - 1.0) / 11.0;
        // dt-halving on a single 2-atom CZ
        Circuit cz;
        cz.level = Level::native;
        cz.lattice = lat.spec();
        cz.r_g_sq_in_a2 = 4.0;
        cz.phi = dev.phi;
        append_layer(cz, Layer{{cz_phi(0, 1, dev.phi)}});
        assign_pulse_timeline(cz, 0.122);
        cfg.dt = 0.001;
        const RunRecord z1 = run_pulse(cz, lat, dev, cfg, false, &init);
        cfg.dt = 0.0005;
        const RunRecord z2 = run_pulse(cz, lat, dev, cfg, false, &init);
        const double dfid = 1 - std::norm(state_overlap(z1.final, z2.final));
        char buf[64];
        std::snprintf(buf, sizeof buf, "drift/gate=%.1e dF=%.1e", drift, dfid);
        d = buf;
        return drift <= 1e-8 && std::abs(dfid) <= 1e-8;
    });

    std::printf("%s (%d criteria failed)\n", g_failures == 0 ? "ALL PASS" : "FAILURES",
                g_failures);
    return g_failures == 0 ? 0 : 1;
}
