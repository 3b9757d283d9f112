#pragma once
#include <vector>

#include <json.hpp>

#include "rydtwin/circuit.hpp"
#include "rydtwin/lattice.hpp"

namespace rydtwin {

constexpr double kTwoPi = 6.28318530717958647692;

struct DeviceParams {
    double a_um = 3.0;
    double r_b_um = 4.98;           // = 1.66 a
    double c6_mhz_um6 = 0.0;        // 0 -> derived from |V(r_b)| = Omega_R
    double omega_r_mhz = 10.0;      // coefficient of sigma+ is 2*pi*this, rad/us
    double gate_duration_us = 0.122;
    double gamma_mhz = -1.0;        // <0 -> fitted default
    double t2_ms = 10.0;
    double d_off_um = 6.0;          // interaction-cutoff pad, default 2a
    // calibrated CZ pulse: Delta(t) = delta0 + delta_max*exp(-(t-t_center)^2/(2 sigma^2))
    double delta0_rad_us = 0.0;
    double delta_max_rad_us = 0.0;
    double sigma_us = 0.0;
    double t_center_us = 0.0;
    double phi = 0.0;               // CZ_PHI frame angle
    double f_cz = 0.0;              // achieved calibration fidelity

    double c6() const;              // MHz um^6
    double omega_r_rad_us() const { return kTwoPi * omega_r_mhz; }
    double v_mhz(double d_um) const;        // -C6/d^6
    double v_rad_us(double d_um) const;
    double gamma_rad_us() const { return gamma_mhz > 0 ? kTwoPi * gamma_mhz : 0.0; }
};

double derive_c6(const DeviceParams& p);  // Omega_R * r_b^6

struct PairTerm {
    int i, j;
    double v_rad_us;  // negative (attractive)
};

struct HamiltonianTerms {
    int n_sites = 0;
    std::vector<PairTerm> pairs;       // all pairs with d <= r_i
    double gamma_rad_us = 0.0;         // anti-Hermitian -i*gamma*n per site iff open
    bool open = false;
};

HamiltonianTerms build_terms(const Lattice& lat, double r_i_um, bool open_system,
                             const DeviceParams& p);

// Per-site drive over one 0.122 us gate window.
struct DriveSpec {
    double omega_x_rad_us = 0.0;  // sigma_x coefficient on (|0>,|1>)
    double omega_z_rad_us = 0.0;  // sigma_z coefficient on (|0>,|1>)
    double omega_r_rad_us = 0.0;  // |1><r| + h.c. coefficient; nonzero marks a CZ
                                  // pulse, which also applies the Gaussian detuning
    bool rydberg() const { return omega_r_rad_us != 0.0; }
};

struct LayerPulse {
    std::vector<DriveSpec> drives;  // one slot per site
    double duration_us = 0.0;
};

LayerPulse pulses_for_layer(const Layer& layer, const DeviceParams& p, int n_sites);

struct CalibResult {
    double delta0_rad_us, delta_max_rad_us, sigma_us, t_center_us;
    double phi;
    double f_cz;
};

// Nelder-Mead over the detuning profile on two isolated atoms at distance a.
// Throws CalibrationError below F = 0.999.
CalibResult calibrate_cz(const DeviceParams& p, double dt_us = 0.00025);

// Average gate fidelity of the two-atom pulse against CZ_PHI(phi) at given pulse
// parameters; also reports the phi frame. Used by calibrate_cz and the tests.
CalibResult evaluate_cz_pulse(const DeviceParams& p, double dt_us = 0.00025);

// gamma (MHz) such that one calibrated CZ from |++> loses 1.4e-2/15 of norm^2.
double fit_gamma(const DeviceParams& p, double target_loss = 1.4e-2 / 15.0);

// Default device profile: derived C6, calibrated pulse, fitted gamma.
// Computed once per process and cached.
const DeviceParams& calibrated_device();

nlohmann::json device_to_json(const DeviceParams& p);
DeviceParams device_from_json(const nlohmann::json& j);

} // namespace rydtwin
