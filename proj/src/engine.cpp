#include "rydtwin/engine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rydtwin/errors.hpp"

namespace rydtwin {

namespace {

long long pow3(int n) {
    long long p = 1;
    while (n-- > 0) p *= 3;
    return p;
}

void check_site_count(int n) {
    if (n < 1) throw std::invalid_argument("need at least one site");
    if (n > 16) throw MemoryGuardError("dense qutrit backend is limited to 16 sites, got " +
                                       std::to_string(n));
}

} // namespace

QutritState QutritState::zeros(int n_sites) {
    check_site_count(n_sites);
    QutritState st;
    st.n = n_sites;
    st.amp.assign(pow3(n_sites), cplx(0.0));
    return st;
}

QutritState QutritState::basis(int n_sites, const std::vector<int>& digits) {
    QutritState st = zeros(n_sites);
    long long idx = 0, stride = 1;
    for (int s = 0; s < n_sites; ++s, stride *= 3) idx += digits.at(s) * stride;
    st.amp[idx] = 1.0;
    return st;
}

double QutritState::norm2() const {
    double s = 0;
    for (const cplx& a : amp) s += std::norm(a);
    return s;
}

QutritState ghz_target(int n_sites, const std::vector<int>& sites) {
    QutritState st = QutritState::zeros(n_sites);
    long long ones = 0;
    for (int s : sites) ones += pow3(s);
    const double r = 1.0 / std::sqrt(2.0);
    st.amp[0] += r;
    st.amp[ones] += r;
    return st;
}

QutritState ghz_target(int n_sites) {
    std::vector<int> all(n_sites);
    for (int i = 0; i < n_sites; ++i) all[i] = i;
    return ghz_target(n_sites, all);
}

QutritState local_ghz_target(int n_sites, const std::vector<std::vector<int>>& groups) {
    QutritState st = QutritState::zeros(n_sites);
    const int g = static_cast<int>(groups.size());
    const double a = std::pow(0.5, g / 2.0);
    for (unsigned mask = 0; mask < (1u << g); ++mask) {
        long long idx = 0;
        for (int k = 0; k < g; ++k)
            if (mask >> k & 1)
                for (int s : groups[k]) idx += pow3(s);
        st.amp[idx] += a;
    }
    return st;
}

namespace {

// 2x2 update on the (da,db) digit pair of one site.
void apply_two_level(QutritState& st, int site, int da, int db, cplx u00, cplx u01,
                     cplx u10, cplx u11) {
    const long long stride = pow3(site);
    const long long dim = static_cast<long long>(st.amp.size());
    const long long block = stride * 3;
    for (long long base = 0; base < dim; base += block) {
        for (long long i = 0; i < stride; ++i) {
            cplx& a = st.amp[base + i + da * stride];
            cplx& b = st.amp[base + i + db * stride];
            const cplx a0 = a, b0 = b;
            a = u00 * a0 + u01 * b0;
            b = u10 * a0 + u11 * b0;
        }
    }
}

// Phase on one two-site digit combination.
void apply_pair_phase(QutritState& st, int s0, int s1, int d0, int d1, cplx phase) {
    const long long st0 = pow3(s0), st1 = pow3(s1);
    const long long dim = static_cast<long long>(st.amp.size());
    for (long long idx = 0; idx < dim; ++idx) {
        if ((idx / st0) % 3 == d0 && (idx / st1) % 3 == d1) st.amp[idx] *= phase;
    }
}

} // namespace

void apply_gate(QutritState& st, const Gate& g) {
    const double invr2 = 1.0 / std::sqrt(2.0);
    switch (g.kind) {
        case GateKind::RX: {
            const double c = std::cos(g.angle / 2), s = std::sin(g.angle / 2);
            apply_two_level(st, g.s0, 0, 1, c, cplx(0, -s), cplx(0, -s), c);
            return;
        }
        case GateKind::RZ: {
            const cplx e0 = std::polar(1.0, -g.angle / 2), e1 = std::polar(1.0, g.angle / 2);
            apply_two_level(st, g.s0, 0, 1, e0, 0.0, 0.0, e1);
            return;
        }
        case GateKind::H:
            apply_two_level(st, g.s0, 0, 1, invr2, invr2, invr2, -invr2);
            return;
        case GateKind::CZ_IDEAL:
            apply_pair_phase(st, g.s0, g.s1, 1, 1, -1.0);
            return;
        case GateKind::CZ_PHI: {
            const cplx ephi = std::polar(1.0, g.angle);
            apply_pair_phase(st, g.s0, g.s1, 0, 1, ephi);
            apply_pair_phase(st, g.s0, g.s1, 1, 0, ephi);
            apply_pair_phase(st, g.s0, g.s1, 1, 1, std::polar(1.0, 2 * g.angle - 3.14159265358979323846));
            return;
        }
        case GateKind::CNOT: {
            const long long stc = pow3(g.s0), stt = pow3(g.s1);
            const long long dim = static_cast<long long>(st.amp.size());
            for (long long idx = 0; idx < dim; ++idx) {
                if ((idx / stc) % 3 == 1 && (idx / stt) % 3 == 0) {
                    std::swap(st.amp[idx], st.amp[idx + stt]);
                }
            }
            return;
        }
    }
    throw std::logic_error("bad gate kind");
}

QutritState run_ideal(const Circuit& c, std::vector<QutritState>* layer_snapshots,
                      const QutritState* init) {
    const int n = c.n_sites();
    QutritState st = init ? *init : QutritState::basis(n, std::vector<int>(n, 0));
    if (st.n != n) throw std::invalid_argument("initial state size mismatch");
    if (layer_snapshots) layer_snapshots->clear();
    for (const Layer& layer : c.layers) {
        for (const Gate& g : layer.gates) apply_gate(st, g);
        if (layer_snapshots) layer_snapshots->push_back(st);
    }
    return st;
}

namespace {

// Running diagonal bookkeeping for a single pass over the amplitude vector in
// index order (an odometer over the site digits keeps updates O(1) amortized).
struct DiagWalker {
    int n;
    std::vector<int> digits;
    std::vector<std::array<double, 3>> zterm;       // omega_z * sigma_z per digit
    std::vector<std::vector<std::pair<int, double>>> padj;  // pair partners
    double zsum = 0, vsum = 0;
    int rcount = 0;

    DiagWalker(const HamiltonianTerms& terms, const std::vector<DriveSpec>* drives)
        : n(terms.n_sites), digits(terms.n_sites, 0), zterm(terms.n_sites),
          padj(terms.n_sites) {
        for (int s = 0; s < n; ++s) {
            const double wz = drives ? (*drives)[s].omega_z_rad_us : 0.0;
            zterm[s] = {wz, -wz, 0.0};
        }
        for (const PairTerm& p : terms.pairs) {
            padj[p.i].push_back({p.j, p.v_rad_us});
            padj[p.j].push_back({p.i, p.v_rad_us});
        }
        for (int s = 0; s < n; ++s) zsum += zterm[s][0];
    }

    double pair_energy_at(int s) const {
        double e = 0;
        for (const auto& [o, v] : padj[s])
            if (digits[o] == 2) e += v;
        return e;
    }

    void set_digit(int s, int d) {
        const int old = digits[s];
        if (old == d) return;
        zsum -= zterm[s][old];
        if (old == 2) {
            rcount--;
            vsum -= pair_energy_at(s);
        }
        digits[s] = d;
        zsum += zterm[s][d];
        if (d == 2) {
            rcount++;
            vsum += pair_energy_at(s);
        }
    }

    // Advance the odometer by one index.
    void step() {
        for (int s = 0; s < n; ++s) {
            if (digits[s] < 2) {
                set_digit(s, digits[s] + 1);
                return;
            }
            set_digit(s, 0);
        }
    }
};

// amp *= exp(-i h (V + sum omega_z sigma_z)) * exp(-gamma h n_r)
void apply_diagonal(QutritState& st, const HamiltonianTerms& terms,
                    const std::vector<DriveSpec>* drives, double h) {
    DiagWalker w(terms, drives);
    const long long dim = static_cast<long long>(st.amp.size());
    for (long long idx = 0; idx < dim; ++idx) {
        if (idx) w.step();
        double scale = 1.0;
        if (terms.gamma_rad_us > 0 && w.rcount > 0)
            scale = std::exp(-terms.gamma_rad_us * h * w.rcount);
        st.amp[idx] *= std::polar(scale, -h * (w.vsum + w.zsum));
    }
}

// Off-diagonal drives frozen at one time: exact per-site 2x2 rotations.
void apply_offdiag(QutritState& st, const std::vector<DriveSpec>& drives, double h,
                   double delta_mid) {
    for (int s = 0; s < (int)drives.size(); ++s) {
        const DriveSpec& d = drives[s];
        if (d.omega_x_rad_us != 0.0) {
            const double th = d.omega_x_rad_us * h;
            apply_two_level(st, s, 0, 1, std::cos(th), cplx(0, -std::sin(th)),
                            cplx(0, -std::sin(th)), std::cos(th));
        }
        if (d.rydberg()) {
            const double om = d.omega_r_rad_us;
            const double m = std::sqrt(om * om + delta_mid * delta_mid / 4);
            const cplx ph = std::polar(1.0, -h * delta_mid / 2);
            cplx u00, u01, u11;
            if (m < 1e-300) {
                u00 = u11 = 1.0;
                u01 = 0.0;
            } else {
                const double cm = std::cos(h * m), sm = std::sin(h * m);
                u00 = ph * cplx(cm, sm * (delta_mid / 2) / m);
                u01 = ph * cplx(0, -sm * om / m);
                u11 = ph * cplx(cm, -sm * (delta_mid / 2) / m);
            }
            apply_two_level(st, s, 1, 2, u00, u01, u01, u11);
        }
    }
}

void record_observables(const QutritState& st, double t, RunRecord& rec) {
    rec.t.push_back(t);
    rec.norm2.push_back(st.norm2());
    if (rec.site_n.empty()) rec.site_n.resize(st.n);
    const long long dim = static_cast<long long>(st.amp.size());
    for (int s = 0; s < st.n; ++s) {
        const long long stride = pow3(s), block = stride * 3;
        double acc = 0;
        for (long long base = 2 * stride; base < dim; base += block)
            for (long long i = 0; i < stride; ++i) acc += std::norm(st.amp[base + i]);
        rec.site_n[s].push_back(acc);
    }
}

} // namespace

QutritState apply_hamiltonian(const QutritState& x, const HamiltonianTerms& terms,
                              const std::vector<DriveSpec>& drives,
                              double delta_rad_us) {
    QutritState y = QutritState::zeros(x.n);
    const long long dim = static_cast<long long>(x.amp.size());
    // diagonal: V + omega_z sigma_z + Delta n (on CZ-driven sites) - i gamma n
    DiagWalker wd(terms, &drives);
    for (long long idx = 0; idx < dim; ++idx) {
        if (idx) wd.step();
        double dsum = 0;
        for (int s = 0; s < x.n; ++s)
            if (wd.digits[s] == 2 && drives[s].rydberg()) dsum += delta_rad_us;
        const cplx diag(wd.vsum + wd.zsum + dsum, -terms.gamma_rad_us * wd.rcount);
        y.amp[idx] = diag * x.amp[idx];
    }
    // off-diagonal drives
    for (int s = 0; s < x.n; ++s) {
        const DriveSpec& d = drives[s];
        const long long stride = pow3(s), block = stride * 3;
        if (d.omega_x_rad_us != 0.0) {
            for (long long base = 0; base < dim; base += block)
                for (long long i = 0; i < stride; ++i) {
                    y.amp[base + i] += d.omega_x_rad_us * x.amp[base + i + stride];
                    y.amp[base + i + stride] += d.omega_x_rad_us * x.amp[base + i];
                }
        }
        if (d.rydberg()) {
            for (long long base = 0; base < dim; base += block)
                for (long long i = 0; i < stride; ++i) {
                    y.amp[base + i + stride] += d.omega_r_rad_us * x.amp[base + i + 2 * stride];
                    y.amp[base + i + 2 * stride] += d.omega_r_rad_us * x.amp[base + i + stride];
                }
        }
    }
    return y;
}

RunRecord run_pulse(const Circuit& c, const Lattice& lat, const DeviceParams& dev,
                    const BackendConfig& cfg, bool open_system,
                    const QutritState* init) {
    const int n = lat.size();
    check_site_count(n);
    if (c.level != Level::native)
        throw std::invalid_argument("pulse backend requires a native circuit");
    if (!(cfg.dt > 0)) throw std::invalid_argument("dt must be positive");
    if (cfg.dt > dev.gate_duration_us / 10 + 1e-15)
        throw std::invalid_argument("dt must be <= gate_duration/10");

    const double tau = c.tau_layer_us > 0 ? c.tau_layer_us : dev.gate_duration_us;
    if (tau < dev.gate_duration_us - 1e-12)
        throw std::invalid_argument("tau_layer below the gate duration");
    const double r_i = std::sqrt(std::max(c.r_g_sq_in_a2, 1.0)) * lat.spec().spacing + dev.d_off_um;
    HamiltonianTerms terms = build_terms(lat, r_i, open_system, dev);

    // Per-layer drive tables plus the stability heuristic on the largest
    // single-term magnitude in plain MHz.
    std::vector<LayerPulse> pulses;
    double max_mhz = 0.0;
    for (const Layer& layer : c.layers) {
        pulses.push_back(pulses_for_layer(layer, dev, n));
        for (const DriveSpec& d : pulses.back().drives) {
            max_mhz = std::max(max_mhz, std::abs(d.omega_x_rad_us) / kTwoPi);
            max_mhz = std::max(max_mhz, std::abs(d.omega_z_rad_us) / kTwoPi);
            if (d.rydberg()) {
                max_mhz = std::max(max_mhz, std::abs(d.omega_r_rad_us) / kTwoPi);
                max_mhz = std::max(max_mhz,
                                   (std::abs(dev.delta0_rad_us) + std::abs(dev.delta_max_rad_us)) / kTwoPi);
            }
        }
    }
    for (const PairTerm& p : terms.pairs)
        max_mhz = std::max(max_mhz, std::abs(p.v_rad_us) / kTwoPi);
    if (cfg.dt * max_mhz > 0.5)
        throw InstabilityError("dt too large for the dominant energy scale: dt*max|H| = " +
                               std::to_string(cfg.dt * max_mhz));

    QutritState st = init ? *init : QutritState::basis(n, std::vector<int>(n, 0));
    if (st.n != n) throw std::invalid_argument("initial state size mismatch");

    RunRecord rec;
    rec.duration_us = tau * c.depth();
    record_observables(st, 0.0, rec);

    // Suzuki 4th-order composition of Strang splittings.
    const double w = 1.0 / (4.0 - std::pow(4.0, 1.0 / 3.0));
    const double stages[5] = {w, w, 1 - 4 * w, w, w};

    for (int li = 0; li < c.depth(); ++li) {
        const double t0 = li * tau;
        const LayerPulse& lp = pulses[li];
        const double act = lp.duration_us;
        const int nsteps = std::max(1, (int)std::llround(act / cfg.dt));
        const double dt = act / nsteps;
        bool any_offdiag = false;
        for (const DriveSpec& d : lp.drives)
            if (d.omega_x_rad_us != 0 || d.rydberg()) any_offdiag = true;

        auto delta_at = [&](double tl) {
            const double x = tl - dev.t_center_us;
            return dev.delta0_rad_us +
                   dev.delta_max_rad_us * std::exp(-x * x / (2 * dev.sigma_us * dev.sigma_us));
        };

        if (!any_offdiag) {
            // purely diagonal layer (RZ only, or idle): exact in one application
            apply_diagonal(st, terms, &lp.drives, act);
            record_observables(st, t0 + act, rec);
        } else {
            double pend = 0.0;  // accumulated half-step of the diagonal flow
            for (int k = 0; k < nsteps; ++k) {
                double tl = k * dt;  // local time within the active window
                for (double ws : stages) {
                    const double h = ws * dt;
                    apply_diagonal(st, terms, &lp.drives, pend + h / 2);
                    apply_offdiag(st, lp.drives, h, delta_at(tl + h / 2));
                    pend = h / 2;
                    tl += h;
                }
                if ((k + 1) % cfg.record_stride == 0 || k + 1 == nsteps) {
                    apply_diagonal(st, terms, &lp.drives, pend);
                    pend = 0.0;
                    record_observables(st, t0 + (k + 1) * dt, rec);
                }
            }
            if (pend != 0.0) apply_diagonal(st, terms, &lp.drives, pend);
        }
        const double gap = tau - act;
        if (gap > 1e-12) {
            apply_diagonal(st, terms, nullptr, gap);
            record_observables(st, t0 + tau, rec);
        }
        if (cfg.snapshot_per_layer) rec.snapshots.push_back(st);
    }
    rec.final = st;
    return rec;
}

Histogram sample_measurements(const QutritState& st, long long shots,
                              ReadoutScheme scheme, std::uint64_t seed) {
    if (shots < 1) throw std::invalid_argument("shots must be >= 1");
    const double n2 = st.norm2();
    if (!(n2 > 0)) throw std::invalid_argument("cannot sample a zero-norm state");

    std::vector<double> u(shots);
    for (long long k = 0; k < shots; ++k) {
        const std::uint64_t r =
            splitmix64(splitmix64(seed) ^ splitmix64(0x9E3779B97F4A7C15ULL * (k + 1)));
        u[k] = (r >> 11) * 0x1.0p-53;
    }
    std::sort(u.begin(), u.end());

    Histogram hist;
    const long long dim = static_cast<long long>(st.amp.size());
    std::vector<int> digits(st.n, 0);
    int c0 = st.n, c1 = 0;
    double cum = 0.0;
    long long k = 0;
    for (long long idx = 0; idx < dim && k < shots; ++idx) {
        if (idx) {
            for (int s = 0; s < st.n; ++s) {
                const int d = digits[s];
                if (d == 0) c0--;
                if (d == 1) c1--;
                if (d < 2) {
                    digits[s] = d + 1;
                    if (d + 1 == 1) c1++;
                    break;
                }
                digits[s] = 0;
                c0++;
            }
        }
        cum += std::norm(st.amp[idx]) / n2;
        const auto key = scheme == ReadoutScheme::two_state ? std::make_pair(c0, c1)
                                                            : std::make_pair(c0, -1);
        while (k < shots && u[k] < cum) {
            hist[key]++;
            k++;
        }
    }
    // numerical tail: assign any remaining shots to the last bin seen
    if (k < shots) {
        const auto key = scheme == ReadoutScheme::two_state ? std::make_pair(c0, c1)
                                                            : std::make_pair(c0, -1);
        hist[key] += shots - k;
    }
    return hist;
}

std::map<std::pair<int, int>, double> exact_distribution(const QutritState& st,
                                                         ReadoutScheme scheme) {
    const double n2 = st.norm2();
    if (!(n2 > 0)) throw std::invalid_argument("cannot sample a zero-norm state");
    std::map<std::pair<int, int>, double> out;
    const long long dim = static_cast<long long>(st.amp.size());
    std::vector<int> digits(st.n, 0);
    int c0 = st.n, c1 = 0;
    for (long long idx = 0; idx < dim; ++idx) {
        if (idx) {
            for (int s = 0; s < st.n; ++s) {
                const int d = digits[s];
                if (d == 0) c0--;
                if (d == 1) c1--;
                if (d < 2) {
                    digits[s] = d + 1;
                    if (d + 1 == 1) c1++;
                    break;
                }
                digits[s] = 0;
                c0++;
            }
        }
        const double p = std::norm(st.amp[idx]) / n2;
        if (p == 0.0) continue;
        const auto key = scheme == ReadoutScheme::two_state ? std::make_pair(c0, c1)
                                                            : std::make_pair(c0, -1);
        out[key] += p;
    }
    return out;
}

cplx state_overlap(const QutritState& a, const QutritState& b) {
    if (a.n != b.n) throw std::invalid_argument("state size mismatch");
    if (a.layout != b.layout) throw std::invalid_argument("state layout mismatch");
    cplx s = 0;
    for (size_t i = 0; i < a.amp.size(); ++i) s += std::conj(a.amp[i]) * b.amp[i];
    return s / std::sqrt(a.norm2() * b.norm2());
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

} // namespace rydtwin
