#pragma once
#include <map>
#include <utility>
#include <vector>

#include "rydtwin/circuit.hpp"
#include "rydtwin/engine.hpp"

namespace rydtwin {

// |<GHZ|psi>|^2 on the raw (possibly unnormalized) vector, so lost norm
// counts as infidelity. GHZ spans `sites` (all sites if empty), |0> elsewhere.
double ghz_fidelity(const QutritState& st, const std::vector<int>& sites = {});
double ghz_fidelity_local(const QutritState& st, const std::vector<std::vector<int>>& groups);

struct FidelityReport {
    double f = 0, infidelity = 0;
    int n_cz = 0;
    double f_avg = 0;  // F^(1/n_cz)
    double norm_loss = 0;
};
FidelityReport make_fidelity_report(double f, int n_cz, double norm2 = 1.0);

struct LayerInfidelity {
    int layer;        // 1-based
    int n_cz;         // CZ count in this layer
    double i_layer;   // 1 - F(i)/F(i-1), floored at 1e-12
    double i_per_gate;
};

// Pulse snapshots vs ideal snapshots, layer by layer (intermediate states).
std::vector<LayerInfidelity> per_layer_infidelity(const std::vector<QutritState>& pulse_snaps,
                                                  const std::vector<QutritState>& ideal_snaps,
                                                  const Circuit& c);

struct RydbergObservables {
    double p_r = 0;  // total Rydberg population at the end
    double t_r = 0;  // time-integrated total Rydberg population (us)
};
RydbergObservables rydberg_observables(const RunRecord& run);

struct DephasingModel {
    double t2_ms = 10.0;
    int n = 0;
    double tau_layer_us = 0;
    std::vector<double> start_times_us;  // per-qubit first RX layer start
};
// closed form F_D(t) = 1/2 + 1/2 exp(-n t / T2)
double dephasing_fidelity(int n, double t_us, double t2_ms);
// estimate mode: per-qubit exposure from start_times to t
double dephasing_fidelity(const DephasingModel& m, double t_us);
// per-qubit dephasing start times (first layer containing an RX on the site)
std::vector<double> dephasing_start_times(const Circuit& c);

struct ReadoutReport {
    double ghz_mass = 0;    // fraction labeled GHZ
    double error_mass = 0;  // fraction labeled error
    double coverage = 0;    // fraction of shots in reported bins
};
ReadoutReport classify_readout(const Histogram& hist, int n_sites, ReadoutScheme scheme);
ReadoutReport classify_readout(const std::map<std::pair<int, int>, double>& dist,
                               int n_sites, ReadoutScheme scheme);

struct RunComparison {
    double c = 0;        // 1 - |<psi1|psi2>|^2
    double delta_f = 0;  // F1 - F2 against the GHZ target
};
RunComparison compare_runs(const QutritState& s1, const QutritState& s2,
                           const std::vector<int>& ghz_sites = {});

} // namespace rydtwin
