#pragma once
#include <map>
#include <string>
#include <vector>

#include "rydtwin/lattice.hpp"

namespace rydtwin {

enum class GateKind { RX, RZ, H, CZ_IDEAL, CNOT, CZ_PHI };
enum class Level { logical, native };

std::string to_string(GateKind k);
GateKind gate_kind_from_string(const std::string& s);
std::string to_string(Level l);
Level level_from_string(const std::string& s);

struct Gate {
    GateKind kind;
    double angle = 0.0;  // radians; unused for H/CNOT/CZ_IDEAL
    int s0 = -1;         // single-qubit site, or control
    int s1 = -1;         // target for two-site gates

    bool two_site() const {
        return kind == GateKind::CNOT || kind == GateKind::CZ_IDEAL ||
               kind == GateKind::CZ_PHI;
    }
};

Gate rx(int s, double theta);
Gate rz(int s, double theta);
Gate hadamard(int s);
Gate cnot(int c, int t);
Gate cz_ideal(int c, int t);
Gate cz_phi(int c, int t, double phi);

struct Layer {
    std::vector<Gate> gates;
};

struct Circuit {
    Level level = Level::logical;
    LatticeSpec lattice;
    std::vector<Layer> layers;
    double r_g_sq_in_a2 = 1.0;
    double tau_layer_us = 0.0;  // 0 = not scheduled
    double phi = 0.0;           // CZ_PHI calibration angle used at lowering
    std::map<std::string, std::string> metadata;

    int depth() const { return static_cast<int>(layers.size()); }
    int n_sites() const;
};

// Throws std::invalid_argument if the layer's gates do not act on disjoint sites.
void append_layer(Circuit& circuit, Layer layer);

// Application order (rightmost matrix factor first).
std::vector<Gate> decompose_hadamard(int site);

// 11 native gates; equals CNOT up to global phase for every phi (verified by a
// matrix oracle in the tests; the control-side phase correction uses -phi).
std::vector<Gate> decompose_cnot_native(int control, int target, double phi);
std::vector<Gate> decompose_cnot_native(const Lattice& lat, int control, int target,
                                        double phi);

// CZ = RZ_c(-phi) RZ_t(-phi) CZ_PHI(phi), all diagonal.
std::vector<Gate> decompose_cz_native(int control, int target, double phi);

struct Violation {
    int layer;
    int gate_a, gate_b;  // indices into the layer
    double dist2_in_a2;  // offending squared cross distance
};

std::vector<Violation> validate_parallel_layers(const Circuit& circuit,
                                                const Lattice& lat,
                                                double r_g_sq_in_a2);

struct CircuitStats {
    int D = 0;
    long long G = 0, G1 = 0, G2 = 0;
    double O1 = 0, O2 = 0;
    int MAX1 = 0, MAX2 = 0;
    double QGS = 0;  // gates per second at tau_layer
};

CircuitStats circuit_stats(const Circuit& circuit, double tau_layer_us);

struct DepthBounds {
    int d_min, d_cz_serial, d_serial;
};

// Closed forms for even L: (3+5L, L^2+14, 11(L^2-1)+3).
DepthBounds depth_bounds(int L);

} // namespace rydtwin
