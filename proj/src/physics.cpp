#include "rydtwin/physics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "rydtwin/engine.hpp"
#include "rydtwin/errors.hpp"

namespace rydtwin {

double DeviceParams::c6() const {
    return c6_mhz_um6 > 0 ? c6_mhz_um6 : derive_c6(*this);
}

double DeviceParams::v_mhz(double d_um) const {
    if (!(d_um > 0)) throw std::invalid_argument("distance must be positive");
    return -c6() / std::pow(d_um, 6);
}

double DeviceParams::v_rad_us(double d_um) const { return kTwoPi * v_mhz(d_um); }

double derive_c6(const DeviceParams& p) {
    // blockade condition |V(r_b)| = Omega_R
    return p.omega_r_mhz * std::pow(p.r_b_um, 6);
}

HamiltonianTerms build_terms(const Lattice& lat, double r_i_um, bool open_system,
                             const DeviceParams& p) {
    if (r_i_um < lat.spec().spacing - 1e-12)
        throw std::invalid_argument("interaction cutoff r_i must be >= a");
    HamiltonianTerms t;
    t.n_sites = lat.size();
    for (int i = 0; i < lat.size(); ++i)
        for (int j = i + 1; j < lat.size(); ++j) {
            const double d = lat.pair_distance(i, j);
            if (d <= r_i_um + 1e-9) t.pairs.push_back({i, j, p.v_rad_us(d)});
        }
    t.open = open_system;
    t.gamma_rad_us = open_system ? p.gamma_rad_us() : 0.0;
    return t;
}

LayerPulse pulses_for_layer(const Layer& layer, const DeviceParams& p, int n_sites) {
    LayerPulse lp;
    lp.drives.assign(n_sites, DriveSpec{});
    lp.duration_us = p.gate_duration_us;
    const double T = p.gate_duration_us;
    for (const Gate& g : layer.gates) {
        switch (g.kind) {
            case GateKind::RX:
                lp.drives.at(g.s0).omega_x_rad_us = g.angle / (2 * T);
                break;
            case GateKind::RZ:
                lp.drives.at(g.s0).omega_z_rad_us = g.angle / (2 * T);
                break;
            case GateKind::CZ_PHI:
                lp.drives.at(g.s0).omega_r_rad_us = p.omega_r_rad_us();
                lp.drives.at(g.s1).omega_r_rad_us = p.omega_r_rad_us();
                break;
            default:
                throw std::invalid_argument("pulse synthesis knows only RX/RZ/CZ_PHI, got " +
                                            to_string(g.kind));
        }
    }
    return lp;
}

namespace {

// Two isolated atoms at distance a, one CZ pulse; returns the 4x4 qubit-block
// unitary columns for inputs |01>, |10>, |11> (|00> is exactly stationary).
struct TwoAtomRun {
    cplx u[4][4];  // basis k = a + 2b, atom-0 digit a fastest
};

TwoAtomRun run_two_atom(const DeviceParams& p, double dt_us) {
    LatticeSpec ls;
    ls.kind = LatticeKind::square;
    ls.rows = 1;
    ls.cols = 2;
    ls.spacing = p.a_um;
    Lattice lat = Lattice::build(ls);

    Circuit c;
    c.level = Level::native;
    c.lattice = ls;
    c.r_g_sq_in_a2 = 1.0;
    append_layer(c, Layer{{cz_phi(0, 1, 0.0)}});

    BackendConfig cfg;
    cfg.dt = dt_us;
    cfg.record_stride = 1 << 28;

    TwoAtomRun out{};
    out.u[0][0] = 1.0;
    const std::vector<std::pair<int, int>> cols = {{1, 0}, {0, 1}, {1, 1}};
    for (const auto& [a, b] : cols) {
        QutritState init = QutritState::basis(2, {a, b});
        RunRecord rec = run_pulse(c, lat, p, cfg, false, &init);
        for (int a2 = 0; a2 < 2; ++a2)
            for (int b2 = 0; b2 < 2; ++b2)
                out.u[a2 + 2 * b2][a + 2 * b] = rec.final.amp[a2 + 3 * b2];
    }
    return out;
}

} // namespace

CalibResult evaluate_cz_pulse(const DeviceParams& p, double dt_us) {
    TwoAtomRun r = run_two_atom(p, dt_us);
    const double phi = std::arg(r.u[1][1]);
    cplx d[4] = {1.0, std::polar(1.0, phi), std::polar(1.0, phi),
                 std::polar(1.0, 2 * phi - 3.14159265358979323846)};
    // M = D(phi)^dag U ; average gate fidelity (Tr(M M^dag) + |Tr M|^2) / 20
    cplx tr = 0;
    double tmm = 0;
    for (int i = 0; i < 4; ++i) {
        tr += std::conj(d[i]) * r.u[i][i];
        for (int j = 0; j < 4; ++j) tmm += std::norm(r.u[i][j]);
    }
    CalibResult out{p.delta0_rad_us, p.delta_max_rad_us, p.sigma_us, p.t_center_us,
                    phi, (tmm + std::norm(tr)) / 20.0};
    return out;
}

namespace {

// Deterministic Nelder-Mead on R^k.
std::vector<double> nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                std::vector<double> x0, std::vector<double> step,
                                int max_eval, double fatol) {
    const int k = static_cast<int>(x0.size());
    std::vector<std::vector<double>> xs(k + 1, x0);
    std::vector<double> fs(k + 1);
    for (int i = 0; i < k; ++i) xs[i + 1][i] += step[i];
    int evals = 0;
    for (int i = 0; i <= k; ++i) fs[i] = (evals++, f(xs[i]));
    while (evals < max_eval) {
        std::vector<int> ord(k + 1);
        for (int i = 0; i <= k; ++i) ord[i] = i;
        std::sort(ord.begin(), ord.end(), [&](int a, int b) { return fs[a] < fs[b]; });
        std::vector<std::vector<double>> xs2;
        std::vector<double> fs2;
        for (int i : ord) {
            xs2.push_back(xs[i]);
            fs2.push_back(fs[i]);
        }
        xs = xs2;
        fs = fs2;
        if (fs[k] - fs[0] < fatol) break;
        std::vector<double> cen(k, 0.0);
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j) cen[j] += xs[i][j] / k;
        auto blend = [&](double t) {
            std::vector<double> x(k);
            for (int j = 0; j < k; ++j) x[j] = cen[j] + t * (xs[k][j] - cen[j]);
            return x;
        };
        auto xr = blend(-1.0);
        const double fr = (evals++, f(xr));
        if (fr < fs[0]) {
            auto xe = blend(-2.0);
            const double fe = (evals++, f(xe));
            if (fe < fr) {
                xs[k] = xe;
                fs[k] = fe;
            } else {
                xs[k] = xr;
                fs[k] = fr;
            }
        } else if (fr < fs[k - 1]) {
            xs[k] = xr;
            fs[k] = fr;
        } else {
            auto xc = blend(fr < fs[k] ? -0.5 : 0.5);
            const double fc = (evals++, f(xc));
            if (fc < std::min(fr, fs[k])) {
                xs[k] = xc;
                fs[k] = fc;
            } else {
                for (int i = 1; i <= k; ++i) {
                    for (int j = 0; j < k; ++j) xs[i][j] = xs[0][j] + 0.5 * (xs[i][j] - xs[0][j]);
                    fs[i] = (evals++, f(xs[i]));
                }
            }
        }
    }
    int best = 0;
    for (int i = 1; i <= k; ++i)
        if (fs[i] < fs[best]) best = i;
    return xs[best];
}

} // namespace

CalibResult calibrate_cz(const DeviceParams& p_in, double dt_us) {
    DeviceParams p = p_in;
    auto objective = [&](const std::vector<double>& x) {
        DeviceParams q = p;
        q.delta0_rad_us = x[0];
        q.delta_max_rad_us = x[1];
        q.sigma_us = std::abs(x[2]);
        q.t_center_us = x[3];
        if (q.sigma_us < 1e-5) return 1.0;
        return 1.0 - evaluate_cz_pulse(q, dt_us).f_cz;
    };

    // Known-good detuning profile as the primary start, plus deterministic
    // random restarts if the landscape shifts under parameter overrides.
    std::vector<std::vector<double>> starts = {
        {32.5525193843157, -353.54999791999194, 0.005199119945245535, 0.060999999841178563}};
    std::uint64_t rng = 12345;
    auto uni = [&](double lo, double hi) {
        rng = splitmix64(rng);
        return lo + (hi - lo) * ((rng >> 11) * 0x1.0p-53);
    };
    for (int i = 0; i < 12; ++i)
        starts.push_back({uni(-3, 3) * p.omega_r_rad_us(), uni(-6, 6) * p.omega_r_rad_us(),
                          uni(0.004, 0.06), uni(0.2, 0.8) * p.gate_duration_us});

    std::vector<double> best;
    double fbest = 2.0;
    for (const auto& s0 : starts) {
        std::vector<double> step = {2.0, 5.0, 0.0005, 0.005};
        auto x = nelder_mead(objective, s0, step, 1200, 1e-14);
        const double fx = objective(x);
        if (fx < fbest) {
            fbest = fx;
            best = x;
        }
        if (fbest < 1e-6) break;  // already past the acceptance bar
    }
    if (fbest > 1e-3)
        throw CalibrationError("CZ calibration stalled at F = " + std::to_string(1 - fbest));

    DeviceParams q = p;
    q.delta0_rad_us = best[0];
    q.delta_max_rad_us = best[1];
    q.sigma_us = std::abs(best[2]);
    q.t_center_us = best[3];
    return evaluate_cz_pulse(q, dt_us);
}

double fit_gamma(const DeviceParams& p_in, double target_loss) {
    if (!(p_in.f_cz > 0))
        throw std::invalid_argument("fit_gamma needs a calibrated device profile");
    LatticeSpec ls;
    ls.kind = LatticeKind::square;
    ls.rows = 1;
    ls.cols = 2;
    ls.spacing = p_in.a_um;
    Lattice lat = Lattice::build(ls);
    Circuit c;
    c.level = Level::native;
    c.lattice = ls;
    c.r_g_sq_in_a2 = 1.0;
    c.phi = p_in.phi;
    append_layer(c, Layer{{cz_phi(0, 1, p_in.phi)}});
    BackendConfig cfg;
    cfg.dt = 0.00025;
    cfg.record_stride = 4;
    // |++>: CZ_PHI is population-diagonal on the qubit block, so T_R repeats
    // identically gate after gate from this input.
    QutritState init = QutritState::zeros(2);
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) init.amp[a + 3 * b] = 0.5;
    RunRecord rec = run_pulse(c, lat, p_in, cfg, false, &init);
    double t_r = 0;
    for (size_t k = 1; k < rec.t.size(); ++k) {
        double s0 = 0, s1 = 0;
        for (const auto& series : rec.site_n) {
            s0 += series[k - 1];
            s1 += series[k];
        }
        t_r += 0.5 * (s0 + s1) * (rec.t[k] - rec.t[k - 1]);
    }
    if (!(t_r > 0)) throw CalibrationError("calibrated CZ shows no Rydberg occupation");
    const double gamma_rad = target_loss / (2 * t_r);
    return gamma_rad / kTwoPi;
}

const DeviceParams& calibrated_device() {
    static const DeviceParams dev = [] {
        DeviceParams p;
        CalibResult r = calibrate_cz(p);
        p.delta0_rad_us = r.delta0_rad_us;
        p.delta_max_rad_us = r.delta_max_rad_us;
        p.sigma_us = r.sigma_us;
        p.t_center_us = r.t_center_us;
        p.phi = r.phi;
        p.f_cz = r.f_cz;
        p.gamma_mhz = fit_gamma(p);
        return p;
    }();
    return dev;
}

nlohmann::json device_to_json(const DeviceParams& p) {
    return {{"schema", "rydtwin-device/1"},
            {"a_um", p.a_um},
            {"r_b_um", p.r_b_um},
            {"c6_mhz_um6", {{"value", p.c6()}, {"derived", p.c6_mhz_um6 <= 0}}},
            {"omega_r_mhz", p.omega_r_mhz},
            {"gate_duration_us", p.gate_duration_us},
            {"gamma_mhz", {{"value", p.gamma_mhz}, {"fitted", true}}},
            {"t2_ms", p.t2_ms},
            {"d_off_um", p.d_off_um},
            {"pulse",
             {{"delta0_rad_us", p.delta0_rad_us},
              {"delta_max_rad_us", p.delta_max_rad_us},
              {"sigma_us", p.sigma_us},
              {"t_center_us", p.t_center_us},
              {"shape", "gaussian_plus_offset"}}},
            {"phi_rad", p.phi},
            {"f_cz", p.f_cz},
            {"provenance", {{"calibration", "nelder-mead, two atoms at distance a"},
                            {"angular_convention", "coefficients are 2*pi*MHz in rad/us"}}}};
}

DeviceParams device_from_json(const nlohmann::json& j) {
    if (j.value("schema", "") != "rydtwin-device/1")
        throw ConfigError("unsupported device schema");
    DeviceParams p;
    p.a_um = j.at("a_um").get<double>();
    p.r_b_um = j.at("r_b_um").get<double>();
    if (!j.at("c6_mhz_um6").at("derived").get<bool>())
        p.c6_mhz_um6 = j.at("c6_mhz_um6").at("value").get<double>();
    p.omega_r_mhz = j.at("omega_r_mhz").get<double>();
    p.gate_duration_us = j.at("gate_duration_us").get<double>();
    p.gamma_mhz = j.at("gamma_mhz").at("value").get<double>();
    p.t2_ms = j.at("t2_ms").get<double>();
    p.d_off_um = j.at("d_off_um").get<double>();
    const auto& pulse = j.at("pulse");
    p.delta0_rad_us = pulse.at("delta0_rad_us").get<double>();
    p.delta_max_rad_us = pulse.at("delta_max_rad_us").get<double>();
    p.sigma_us = pulse.at("sigma_us").get<double>();
    p.t_center_us = pulse.at("t_center_us").get<double>();
    p.phi = j.at("phi_rad").get<double>();
    p.f_cz = j.at("f_cz").get<double>();
    return p;
}

} // namespace rydtwin
