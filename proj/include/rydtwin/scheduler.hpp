#pragma once
#include <array>
#include <complex>
#include <vector>

#include "rydtwin/circuit.hpp"
#include "rydtwin/lattice.hpp"

namespace rydtwin {

struct PlanCz {
    int control, target;
    GateKind kind = GateKind::CNOT;  // CNOT or CZ_IDEAL
};

struct PlanRound {
    int layer;  // 1-based native layer carrying the CZ_PHI pulses
    std::vector<PlanCz> czs;
};

// A CZ-round plan: Hadamard start sites plus scheduled entangling rounds.
struct Plan {
    std::vector<int> roots;
    std::vector<PlanRound> rounds;
};

// Expand a plan into a layered native circuit. The run of single-qubit gates a
// site accumulates between two consecutive CZs (post of one, pre of the next)
// is re-emitted as at most 3 Euler ZXZ rotations so it fits the 3-layer gap.
// serial = fully expanded, one gate per layer (depth equals gate count).
Circuit lower_plan(const Plan& plan, const Lattice& lat, double r_g_sq_in_a2,
                   double phi, bool serial = false);

// Greedy lowering of a logical circuit (H / CNOT / CZ_IDEAL layers).
Circuit lower_to_native(const Circuit& logical, const Lattice& lat,
                        double r_g_sq_in_a2, double phi, bool serial = false);

// Stamps tau_layer (>= 0.122 us) and returns the total duration D * tau.
double assign_pulse_timeline(Circuit& c, double tau_layer_us,
                             double gate_duration_us = 0.122);

// ZXZ Euler angles (alpha, beta, gamma) with U ~ RZ(alpha) RX(beta) RZ(gamma)
// up to global phase; u is row-major 2x2.
std::array<double, 3> euler_zxz(const std::array<std::complex<double>, 4>& u);

// Single-qubit gate sequences around a CZ_PHI, in application order.
std::vector<Gate> cnot_pre_gates(int site, bool is_control, double phi);
std::vector<Gate> cnot_post_gates(int site, bool is_control);

} // namespace rydtwin
