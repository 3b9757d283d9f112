#pragma once
#include <complex>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "rydtwin/circuit.hpp"
#include "rydtwin/physics.hpp"

namespace rydtwin {

using cplx = std::complex<double>;

struct QutritState {
    int n = 0;
    std::vector<cplx> amp;  // length 3^n, site-0 digit fastest
    std::string layout = "row-major";

    static QutritState zeros(int n_sites);
    static QutritState basis(int n_sites, const std::vector<int>& digits);
    double norm2() const;
};

// (|0..0> + |1..1>)/sqrt(2) over `sites`, |0> elsewhere.
QutritState ghz_target(int n_sites, const std::vector<int>& sites);
QutritState ghz_target(int n_sites);
// Tensor product of GHZ states on disjoint groups, |0> elsewhere.
QutritState local_ghz_target(int n_sites, const std::vector<std::vector<int>>& groups);

void apply_gate(QutritState& st, const Gate& g);

// Exact gate-by-gate application; optionally records the state after every layer.
QutritState run_ideal(const Circuit& c, std::vector<QutritState>* layer_snapshots = nullptr,
                      const QutritState* init = nullptr);

struct BackendConfig {
    double dt = 0.001;        // us
    int record_stride = 10;   // steps between observable records
    bool snapshot_per_layer = false;
    std::uint64_t seed = 0;
};

struct RunRecord {
    std::vector<double> t;                    // us
    std::vector<double> norm2;                // squared norm at each record
    std::vector<std::vector<double>> site_n;  // unnormalized <n> per site at each record
    std::vector<QutritState> snapshots;       // per layer if requested
    QutritState final;
    double duration_us = 0.0;
};

// Fixed-step 4th-order explicit split-step integration of dpsi/dt = -iH(t)psi.
RunRecord run_pulse(const Circuit& c, const Lattice& lat, const DeviceParams& dev,
                    const BackendConfig& cfg, bool open_system,
                    const QutritState* init = nullptr);

// y = H(t) x, matrix-free; reference oracle for the integrator's term handling.
QutritState apply_hamiltonian(const QutritState& x, const HamiltonianTerms& terms,
                              const std::vector<DriveSpec>& drives,
                              double delta_rad_us);

enum class ReadoutScheme { two_state, single_state };

// two_state keys: (count of 0s, count of 1s); single_state keys: (count of 0s, -1).
using Histogram = std::map<std::pair<int, int>, long long>;

Histogram sample_measurements(const QutritState& st, long long shots,
                              ReadoutScheme scheme, std::uint64_t seed);

// Exact outcome distribution in the same binning (probability per bin).
std::map<std::pair<int, int>, double> exact_distribution(const QutritState& st,
                                                         ReadoutScheme scheme);

cplx state_overlap(const QutritState& a, const QutritState& b);

std::uint64_t splitmix64(std::uint64_t x);

} // namespace rydtwin
