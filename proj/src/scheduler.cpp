#include "rydtwin/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "rydtwin/errors.hpp"

namespace rydtwin {

namespace {

constexpr double kPi = 3.14159265358979323846;

using mat2 = std::array<std::complex<double>, 4>;  // row-major [u00,u01,u10,u11]

mat2 mul(const mat2& a, const mat2& b) {
    return {a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3],
            a[2] * b[0] + a[3] * b[2], a[2] * b[1] + a[3] * b[3]};
}

mat2 gate_matrix(const Gate& g) {
    switch (g.kind) {
        case GateKind::RX: {
            const double c = std::cos(g.angle / 2), s = std::sin(g.angle / 2);
            return {c, std::complex<double>(0, -s), std::complex<double>(0, -s), c};
        }
        case GateKind::RZ:
            return {std::polar(1.0, -g.angle / 2), 0.0, 0.0, std::polar(1.0, g.angle / 2)};
        case GateKind::H: {
            const double r = 1.0 / std::sqrt(2.0);
            return {r, r, r, -r};
        }
        default:
            throw std::logic_error("not a single-qubit gate");
    }
}

double wrap_angle(double a) {
    a = std::remainder(a, 2 * kPi);
    return a;
}

} // namespace

std::array<double, 3> euler_zxz(const mat2& u_in) {
    // normalize to det = 1
    const std::complex<double> det = u_in[0] * u_in[3] - u_in[1] * u_in[2];
    const std::complex<double> s = std::sqrt(det);
    mat2 u = {u_in[0] / s, u_in[1] / s, u_in[2] / s, u_in[3] / s};
    const double beta = 2 * std::atan2(std::abs(u[1]), std::abs(u[0]));
    double alpha, gamma;
    if (std::abs(u[0]) > 1e-12 && std::abs(u[1]) > 1e-12) {
        const double sum = -2 * std::arg(u[0]);
        const double dif = -2 * (std::arg(u[1]) + kPi / 2);
        alpha = (sum + dif) / 2;
        gamma = (sum - dif) / 2;
    } else if (std::abs(u[1]) <= 1e-12) {
        alpha = -2 * std::arg(u[0]);
        gamma = 0;
    } else {
        alpha = -2 * (std::arg(u[1]) + kPi / 2);
        gamma = 0;
    }
    return {wrap_angle(alpha), wrap_angle(beta), wrap_angle(gamma)};
}

std::vector<Gate> cnot_pre_gates(int s, bool is_control, double phi) {
    if (is_control)
        return {rz(s, 3 * kPi / 2), rx(s, kPi), rz(s, -phi - 3 * kPi / 2)};
    return {rz(s, 3 * kPi / 2), rx(s, kPi / 2), rz(s, -phi - 3 * kPi / 2)};
}

std::vector<Gate> cnot_post_gates(int s, bool is_control) {
    if (is_control) return {rx(s, kPi)};
    return {rx(s, kPi / 2), rz(s, -kPi / 2), rx(s, kPi / 2)};
}

namespace {

std::vector<Gate> cz_pre_gates(int, GateKind kind, bool, double) {
    if (kind == GateKind::CZ_IDEAL) return {};
    throw std::logic_error("unexpected plan gate");
}

std::vector<Gate> plan_pre(int site, GateKind kind, bool is_control, double phi) {
    if (kind == GateKind::CNOT) return cnot_pre_gates(site, is_control, phi);
    return cz_pre_gates(site, kind, is_control, phi);
}

std::vector<Gate> plan_post(int site, GateKind kind, bool is_control, double phi) {
    if (kind == GateKind::CNOT) return cnot_post_gates(site, is_control);
    return {rz(site, -phi)};  // CZ_IDEAL correction, diagonal
}

// Recompile a run of single-qubit gates into <= 3 Euler rotations.
std::vector<Gate> merge_run(int site, const std::vector<Gate>& run) {
    mat2 u = {1.0, 0.0, 0.0, 1.0};
    for (const Gate& g : run) u = mul(gate_matrix(g), u);
    const auto [alpha, beta, gamma] = euler_zxz(u);
    // keep the canonical ZXZ triple; only a full identity run disappears
    if (std::abs(alpha) < 1e-12 && std::abs(beta) < 1e-12 && std::abs(gamma) < 1e-12)
        return {};
    return {rz(site, gamma), rx(site, beta), rz(site, alpha)};
}

struct SiteEvent {
    int layer;
    bool is_control;
    GateKind kind;
};

void place(std::map<int, Layer>& layers, int layer, const Gate& g) {
    layers[layer].gates.push_back(g);
}

} // namespace

Circuit lower_plan(const Plan& plan, const Lattice& lat, double r_g_sq_in_a2,
                   double phi, bool serial) {
    Circuit c;
    c.level = Level::native;
    c.lattice = lat.spec();
    c.r_g_sq_in_a2 = r_g_sq_in_a2;
    c.phi = phi;
    c.metadata["cnot_oracle"] = "cnot";

    if (serial) {
        for (int r : plan.roots)
            for (const Gate& g : decompose_hadamard(r)) append_layer(c, Layer{{g}});
        for (const PlanRound& round : plan.rounds)
            for (const PlanCz& z : round.czs) {
                const auto gates = z.kind == GateKind::CNOT
                                       ? decompose_cnot_native(z.control, z.target, phi)
                                       : decompose_cz_native(z.control, z.target, phi);
                for (const Gate& g : gates) append_layer(c, Layer{{g}});
            }
        return c;
    }

    std::map<int, std::vector<SiteEvent>> events;
    std::map<int, Layer> layers;
    int prev_layer = 0;
    for (const PlanRound& round : plan.rounds) {
        if (round.layer <= prev_layer)
            throw std::invalid_argument("plan rounds must have increasing layers");
        prev_layer = round.layer;
        for (const PlanCz& z : round.czs) {
            events[z.control].push_back({round.layer, true, z.kind});
            events[z.target].push_back({round.layer, false, z.kind});
            place(layers, round.layer, cz_phi(z.control, z.target, phi));
        }
    }

    for (int r : plan.roots) {
        int l = 1;
        for (const Gate& g : decompose_hadamard(r)) place(layers, l++, g);
    }

    for (const auto& [site, evs] : events) {
        const bool is_root = std::count(plan.roots.begin(), plan.roots.end(), site) > 0;
        // pre of the first CZ, placed greedily early (after the H on a root)
        {
            const SiteEvent& e = evs.front();
            auto pre = plan_pre(site, e.kind, e.is_control, phi);
            int l = is_root ? 4 : 1;
            if (l + (int)pre.size() > e.layer)
                throw std::invalid_argument("plan leaves no room for pre-CZ gates");
            for (const Gate& g : pre) place(layers, l++, g);
        }
        // merged run between consecutive CZs
        for (size_t k = 1; k < evs.size(); ++k) {
            const SiteEvent& a = evs[k - 1];
            const SiteEvent& b = evs[k];
            std::vector<Gate> run = plan_post(site, a.kind, a.is_control, phi);
            for (const Gate& g : plan_pre(site, b.kind, b.is_control, phi)) run.push_back(g);
            auto merged = merge_run(site, run);
            if ((int)merged.size() > b.layer - a.layer - 1)
                throw std::invalid_argument("plan gap too small for merged local gates");
            int l = a.layer + 1;
            for (const Gate& g : merged) place(layers, l++, g);
        }
        // post of the last CZ
        {
            const SiteEvent& e = evs.back();
            int l = e.layer + 1;
            for (const Gate& g : plan_post(site, e.kind, e.is_control, phi))
                place(layers, l++, g);
        }
    }

    const int depth = layers.empty() ? 0 : layers.rbegin()->first;
    for (int l = 1; l <= depth; ++l) append_layer(c, std::move(layers[l]));

    if (!validate_parallel_layers(c, lat, r_g_sq_in_a2).empty())
        throw std::invalid_argument("plan violates the parallel-CZ radius r_g");
    return c;
}

Circuit lower_to_native(const Circuit& logical, const Lattice& lat,
                        double r_g_sq_in_a2, double phi, bool serial) {
    if (logical.level != Level::logical)
        throw std::invalid_argument("lower_to_native expects a logical circuit");
    Plan plan;
    std::map<int, int> last;  // site -> layer of its last CZ (or 3 for a fresh H)
    std::vector<bool> entangling_seen(lat.size(), false);
    int prev_round_layer = 0;
    for (const Layer& layer : logical.layers) {
        PlanRound round;
        for (const Gate& g : layer.gates) {
            if (g.kind == GateKind::H) {
                if (entangling_seen[g.s0])
                    throw std::invalid_argument("H after an entangling gate is not lowerable");
                plan.roots.push_back(g.s0);
                last[g.s0] = 3;
            } else if (g.kind == GateKind::CNOT || g.kind == GateKind::CZ_IDEAL) {
                round.czs.push_back({g.s0, g.s1, g.kind});
            } else {
                throw std::invalid_argument("logical circuits may contain only H/CNOT/CZ");
            }
        }
        if (round.czs.empty()) continue;
        int l = prev_round_layer + 1;
        for (const PlanCz& z : round.czs) {
            for (int s : {z.control, z.target}) {
                entangling_seen[s] = true;
                const auto it = last.find(s);
                l = std::max(l, it == last.end() ? 4 : it->second + 4);
            }
        }
        for (const PlanCz& z : round.czs) {
            last[z.control] = l;
            last[z.target] = l;
        }
        round.layer = l;
        prev_round_layer = l;
        plan.rounds.push_back(std::move(round));
    }
    return lower_plan(plan, lat, r_g_sq_in_a2, phi, serial);
}

double assign_pulse_timeline(Circuit& c, double tau_layer_us, double gate_duration_us) {
    if (tau_layer_us < gate_duration_us - 1e-12)
        throw std::invalid_argument("tau_layer must be >= the 0.122 us gate duration");
    c.tau_layer_us = tau_layer_us;
    const double total = c.depth() * tau_layer_us;
    c.metadata["tau_total_us"] = std::to_string(total);
    return total;
}

} // namespace rydtwin
