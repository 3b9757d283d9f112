#include "rydtwin/analysis.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

namespace rydtwin {

namespace {

std::complex<double> raw_overlap(const QutritState& target, const QutritState& st) {
    if (target.n != st.n) throw std::invalid_argument("site-count mismatch");
    std::complex<double> s = 0;
    for (size_t i = 0; i < st.amp.size(); ++i) s += std::conj(target.amp[i]) * st.amp[i];
    return s;
}

} // namespace

double ghz_fidelity(const QutritState& st, const std::vector<int>& sites) {
    const QutritState target =
        sites.empty() ? ghz_target(st.n) : ghz_target(st.n, sites);
    return std::norm(raw_overlap(target, st));
}

double ghz_fidelity_local(const QutritState& st, const std::vector<std::vector<int>>& groups) {
    return std::norm(raw_overlap(local_ghz_target(st.n, groups), st));
}

FidelityReport make_fidelity_report(double f, int n_cz, double norm2) {
    FidelityReport r;
    r.f = f;
    r.infidelity = 1 - f;
    r.n_cz = n_cz;
    r.f_avg = n_cz > 0 ? std::pow(f, 1.0 / n_cz) : f;
    r.norm_loss = 1 - norm2;
    return r;
}

std::vector<LayerInfidelity> per_layer_infidelity(const std::vector<QutritState>& pulse_snaps,
                                                  const std::vector<QutritState>& ideal_snaps,
                                                  const Circuit& c) {
    if (pulse_snaps.size() != c.layers.size() || ideal_snaps.size() != c.layers.size())
        throw std::invalid_argument("need one snapshot per layer from both backends");
    constexpr double kFloor = 1e-12;
    std::vector<LayerInfidelity> out;
    double f_prev = 1.0;
    for (size_t i = 0; i < c.layers.size(); ++i) {
        const double f = std::norm(raw_overlap(ideal_snaps[i], pulse_snaps[i]));
        const double rho = f_prev > 0 ? f / f_prev : 0.0;
        int n_cz = 0;
        for (const Gate& g : c.layers[i].gates)
            if (g.two_site()) ++n_cz;
        LayerInfidelity li;
        li.layer = static_cast<int>(i) + 1;
        li.n_cz = n_cz;
        li.i_layer = std::max(kFloor, 1 - rho);
        li.i_per_gate =
            n_cz > 0 ? std::max(kFloor, 1 - std::pow(rho, 1.0 / n_cz)) : li.i_layer;
        out.push_back(li);
        f_prev = f;
    }
    return out;
}

RydbergObservables rydberg_observables(const RunRecord& run) {
    if (run.t.empty()) throw std::invalid_argument("run has no recorded observables");
    RydbergObservables obs;
    const size_t m = run.t.size();
    auto total = [&](size_t k) {
        double s = 0;
        for (const auto& series : run.site_n) s += series[k];
        return s;
    };
    obs.p_r = total(m - 1);
    for (size_t k = 1; k < m; ++k)
        obs.t_r += 0.5 * (total(k - 1) + total(k)) * (run.t[k] - run.t[k - 1]);
    return obs;
}

double dephasing_fidelity(int n, double t_us, double t2_ms) {
    if (t_us < 0) throw std::invalid_argument("t must be non-negative");
    return 0.5 + 0.5 * std::exp(-n * t_us / (t2_ms * 1e3));
}

double dephasing_fidelity(const DephasingModel& m, double t_us) {
    double exposure = 0;
    for (double s : m.start_times_us) exposure += std::max(0.0, t_us - s);
    return 0.5 + 0.5 * std::exp(-exposure / (m.t2_ms * 1e3));
}

std::vector<double> dephasing_start_times(const Circuit& c) {
    std::vector<double> start(c.n_sites(), -1.0);
    for (size_t i = 0; i < c.layers.size(); ++i)
        for (const Gate& g : c.layers[i].gates)
            if (g.kind == GateKind::RX && start[g.s0] < 0)
                start[g.s0] = static_cast<double>(i) * c.tau_layer_us;
    std::vector<double> out;
    for (double s : start)
        if (s >= 0) out.push_back(s);
    return out;
}

namespace {

template <typename Map>
ReadoutReport classify_impl(const Map& bins, int n_sites, ReadoutScheme scheme) {
    double ghz = 0, err = 0;
    for (const auto& [key, mass] : bins) {
        bool is_ghz;
        if (scheme == ReadoutScheme::two_state)
            is_ghz = (key.first == n_sites && key.second == 0) ||
                     (key.first == 0 && key.second == n_sites);
        else
            is_ghz = key.first == n_sites || key.first == 0;
        (is_ghz ? ghz : err) += static_cast<double>(mass);
    }
    const double total = ghz + err;
    ReadoutReport r;
    if (total > 0) {
        r.ghz_mass = ghz / total;
        r.error_mass = err / total;
        r.coverage = 1.0;  // the full histogram is reported
    }
    return r;
}

} // namespace

ReadoutReport classify_readout(const Histogram& hist, int n_sites, ReadoutScheme scheme) {
    return classify_impl(hist, n_sites, scheme);
}

ReadoutReport classify_readout(const std::map<std::pair<int, int>, double>& dist,
                               int n_sites, ReadoutScheme scheme) {
    return classify_impl(dist, n_sites, scheme);
}

RunComparison compare_runs(const QutritState& s1, const QutritState& s2,
                           const std::vector<int>& ghz_sites) {
    RunComparison r;
    r.c = 1 - std::norm(state_overlap(s1, s2));
    r.delta_f = ghz_fidelity(s1, ghz_sites) - ghz_fidelity(s2, ghz_sites);
    return r;
}

} // namespace rydtwin
