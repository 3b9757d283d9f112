#include "rydtwin/circuit.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "rydtwin/errors.hpp"

namespace rydtwin {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

std::string to_string(GateKind k) {
    switch (k) {
        case GateKind::RX: return "RX";
        case GateKind::RZ: return "RZ";
        case GateKind::H: return "H";
        case GateKind::CZ_IDEAL: return "CZ";
        case GateKind::CNOT: return "CNOT";
        case GateKind::CZ_PHI: return "CZ_PHI";
    }
    throw std::logic_error("bad gate kind");
}

GateKind gate_kind_from_string(const std::string& s) {
    if (s == "RX") return GateKind::RX;
    if (s == "RZ") return GateKind::RZ;
    if (s == "H") return GateKind::H;
    if (s == "CZ") return GateKind::CZ_IDEAL;
    if (s == "CNOT") return GateKind::CNOT;
    if (s == "CZ_PHI") return GateKind::CZ_PHI;
    throw ConfigError("unknown gate kind: " + s);
}

std::string to_string(Level l) { return l == Level::logical ? "logical" : "native"; }

Level level_from_string(const std::string& s) {
    if (s == "logical") return Level::logical;
    if (s == "native") return Level::native;
    throw ConfigError("unknown circuit level: " + s);
}

Gate rx(int s, double theta) { return Gate{GateKind::RX, theta, s, -1}; }
Gate rz(int s, double theta) { return Gate{GateKind::RZ, theta, s, -1}; }
Gate hadamard(int s) { return Gate{GateKind::H, 0.0, s, -1}; }

static Gate two_site_gate(GateKind k, int c, int t, double angle) {
    if (c == t) throw std::invalid_argument("two-site gate needs distinct sites");
    return Gate{k, angle, c, t};
}

Gate cnot(int c, int t) { return two_site_gate(GateKind::CNOT, c, t, 0.0); }
Gate cz_ideal(int c, int t) { return two_site_gate(GateKind::CZ_IDEAL, c, t, 0.0); }
Gate cz_phi(int c, int t, double phi) { return two_site_gate(GateKind::CZ_PHI, c, t, phi); }

int Circuit::n_sites() const {
    int cols = lattice.cols == 0 ? lattice.rows : lattice.cols;
    return lattice.rows * cols;
}

void append_layer(Circuit& circuit, Layer layer) {
    std::set<int> sites;
    for (const Gate& g : layer.gates) {
        if (!std::isfinite(g.angle)) throw std::invalid_argument("non-finite gate angle");
        if (!sites.insert(g.s0).second)
            throw std::invalid_argument("layer gates must act on disjoint sites");
        if (g.two_site() && !sites.insert(g.s1).second)
            throw std::invalid_argument("layer gates must act on disjoint sites");
    }
    circuit.layers.push_back(std::move(layer));
}

std::vector<Gate> decompose_hadamard(int s) {
    return {rz(s, kPi / 2), rx(s, kPi / 2), rz(s, kPi / 2)};
}

std::vector<Gate> decompose_cnot_native(int c, int t, double phi) {
    return {
        rz(t, 3 * kPi / 2), rx(t, kPi / 2), rz(t, -phi - 3 * kPi / 2),
        rz(c, 3 * kPi / 2), rx(c, kPi),     rz(c, -phi - 3 * kPi / 2),
        cz_phi(c, t, phi),
        rx(t, kPi / 2),     rz(t, -kPi / 2), rx(t, kPi / 2),
        rx(c, kPi),
    };
}

std::vector<Gate> decompose_cnot_native(const Lattice& lat, int c, int t, double phi) {
    if (std::abs(lat.dist2_in_a2(c, t) - 1.0) > 1e-9)
        throw std::invalid_argument("CNOT lowering requires nearest-neighbor sites");
    return decompose_cnot_native(c, t, phi);
}

std::vector<Gate> decompose_cz_native(int c, int t, double phi) {
    return {cz_phi(c, t, phi), rz(c, -phi), rz(t, -phi)};
}

std::vector<Violation> validate_parallel_layers(const Circuit& circuit,
                                                const Lattice& lat,
                                                double r_g_sq_in_a2) {
    std::vector<Violation> out;
    for (int li = 0; li < circuit.depth(); ++li) {
        const auto& gates = circuit.layers[li].gates;
        std::vector<int> twos;
        for (int gi = 0; gi < (int)gates.size(); ++gi)
            if (gates[gi].two_site()) twos.push_back(gi);
        for (size_t i = 0; i < twos.size(); ++i) {
            for (size_t j = i + 1; j < twos.size(); ++j) {
                const Gate& a = gates[twos[i]];
                const Gate& b = gates[twos[j]];
                double m = 1e300;
                for (int sa : {a.s0, a.s1})
                    for (int sb : {b.s0, b.s1})
                        m = std::min(m, lat.dist2_in_a2(sa, sb));
                if (m < r_g_sq_in_a2 - 1e-9)
                    out.push_back(Violation{li, twos[i], twos[j], m});
            }
        }
    }
    return out;
}

CircuitStats circuit_stats(const Circuit& circuit, double tau_layer_us) {
    if (!(tau_layer_us > 0)) throw std::invalid_argument("tau_layer must be positive");
    CircuitStats st;
    st.D = circuit.depth();
    for (const Layer& layer : circuit.layers) {
        int one = 0, two = 0;
        for (const Gate& g : layer.gates) (g.two_site() ? two : one)++;
        st.G1 += one;
        st.G2 += two;
        st.MAX1 = std::max(st.MAX1, one);
        st.MAX2 = std::max(st.MAX2, two);
    }
    st.G = st.G1 + st.G2;
    if (st.D > 0) {
        st.O1 = double(st.G1) / st.D;
        st.O2 = double(st.G2) / st.D;
        st.QGS = double(st.G) / (st.D * tau_layer_us * 1e-6);
    }
    return st;
}

DepthBounds depth_bounds(int L) {
    if (L < 2 || L % 2 != 0)
        throw std::invalid_argument("depth bounds are stated for even L >= 2");
    return DepthBounds{3 + 5 * L, L * L + 14, 11 * (L * L - 1) + 3};
}

} // namespace rydtwin
