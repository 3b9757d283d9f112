#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rydtwin/analysis.hpp"
#include "rydtwin/compiler.hpp"
#include "rydtwin/engine.hpp"
#include "rydtwin/errors.hpp"
#include "rydtwin/json_io.hpp"
#include "rydtwin/physics.hpp"
#include "rydtwin/scheduler.hpp"

namespace fs = std::filesystem;
using rydtwin::json;

namespace {

int g_threads = 1;

json load_config(const std::string& path) {
    if (path.empty()) throw rydtwin::ConfigError("missing --config");
    try {
        return rydtwin::load_json(path);
    } catch (const std::exception& e) {
        throw rydtwin::ConfigError(std::string("cannot read config: ") + e.what());
    }
}

const json& require(const json& j, const std::string& key) {
    if (!j.contains(key)) throw rydtwin::ConfigError("missing config key: " + key);
    return j.at(key);
}

rydtwin::LatticeSpec lattice_from_config(const json& cfg) {
    const json& l = require(cfg, "lattice");
    rydtwin::LatticeSpec spec;
    spec.kind = rydtwin::lattice_kind_from_string(
        l.value("kind", std::string("square")));
    spec.rows = require(l, "rows").get<int>();
    spec.cols = l.value("cols", 0);
    spec.spacing = l.value("spacing", 3.0);
    return spec;
}

rydtwin::DeviceParams device_from_config(const json& cfg) {
    if (cfg.contains("device") && !cfg.at("device").empty())
        return rydtwin::device_from_json(cfg.at("device"));
    return rydtwin::calibrated_device();
}

rydtwin::CompileRequest request_from_config(const json& cfg, std::uint64_t seed) {
    const json& c = require(cfg, "compile");
    rydtwin::CompileRequest req;
    req.lattice = lattice_from_config(cfg);
    req.r_g_sq_in_a2 = require(c, "r_g_sq_in_a2").get<double>();
    const std::string mode = c.value("mode", std::string("native"));
    if (mode == "native")
        req.mode = rydtwin::CompileMode::native;
    else if (mode == "logical")
        req.mode = rydtwin::CompileMode::logical;
    else
        throw rydtwin::ConfigError("compile.mode must be native or logical");
    const std::string target = c.value("target", std::string("global_ghz"));
    if (target == "global_ghz") {
        req.target = rydtwin::CompileTarget::global_ghz;
    } else if (target == "local_ghz") {
        req.target = rydtwin::CompileTarget::local_ghz;
        req.groups = require(c, "groups").get<std::vector<std::vector<int>>>();
    } else {
        throw rydtwin::ConfigError("compile.target must be global_ghz or local_ghz");
    }
    if (c.contains("policy")) {
        const json& p = c.at("policy");
        req.policy.keep_fraction = p.value("keep_fraction", req.policy.keep_fraction);
        req.policy.max_geometries = p.value("max_geometries", req.policy.max_geometries);
        req.policy.lag = p.value("lag", req.policy.lag);
    }
    req.seed = seed;
    req.aggressive = c.value("aggressive", false);
    req.serial = c.value("serial", false);
    return req;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

void append_log(const fs::path& dir, const std::string& line) {
    std::ofstream out(dir / "rydtwin.log", std::ios::app);
    out << line << "\n";
}

void stamp(json& j, const json& cfg, const std::string& schema) {
    j["schema"] = schema;
    j["config_hash"] = rydtwin::config_hash(cfg);
}

struct SimOptions {
    std::string backend = "pulse";
    bool open_system = false;
    double dt = 0.001;
    std::uint64_t seed = 0;
    double tau_layer_us = 2.0;
    bool snapshots = false;
};

struct SimOutcome {
    rydtwin::QutritState state;
    rydtwin::RunRecord record;  // empty for ideal backend
    double f = 0;
};

SimOutcome simulate_circuit(rydtwin::Circuit c, const rydtwin::DeviceParams& dev,
                            const SimOptions& opt) {
    SimOutcome out;
    const rydtwin::Lattice lat = rydtwin::Lattice::build(c.lattice);
    if (opt.backend == "ideal") {
        out.state = rydtwin::run_ideal(c);
    } else if (opt.backend == "pulse") {
        if (lat.size() > 9)
            std::cerr << "warning: pulse backend with N=" << lat.size()
                      << " needs ~" << (sizeof(rydtwin::cplx) * 2.0 *
                                        std::pow(3.0, lat.size()) / (1 << 20))
                      << " MiB\n";
        rydtwin::assign_pulse_timeline(c, opt.tau_layer_us);
        rydtwin::BackendConfig bc;
        bc.dt = opt.dt;
        bc.seed = opt.seed;
        bc.snapshot_per_layer = opt.snapshots;
        out.record = rydtwin::run_pulse(c, lat, dev, bc, opt.open_system);
        out.state = out.record.final;
    } else {
        throw rydtwin::ConfigError("--backend must be ideal or pulse");
    }
    out.f = rydtwin::ghz_fidelity(out.state);
    return out;
}

json run_record_json(const rydtwin::RunRecord& r) {
    json j;
    j["duration_us"] = r.duration_us;
    if (!r.norm2.empty()) j["final_norm2"] = r.norm2.back();
    const rydtwin::RydbergObservables obs =
        r.t.empty() ? rydtwin::RydbergObservables{} : rydtwin::rydberg_observables(r);
    j["p_r"] = obs.p_r;
    j["t_r_us"] = obs.t_r;
    return j;
}

void write_timeseries(const fs::path& path, const rydtwin::RunRecord& r) {
    std::ofstream out(path);
    out << "t_us,norm2,total_n\n";
    for (size_t k = 0; k < r.t.size(); ++k) {
        double tot = 0;
        for (const auto& s : r.site_n) tot += s[k];
        out << rydtwin::format_angle(r.t[k]) << "," << rydtwin::format_angle(r.norm2[k])
            << "," << rydtwin::format_angle(tot) << "\n";
    }
}

int cmd_compile(const std::string& config, std::uint64_t seed, const fs::path& out_dir) {
    const json cfg = load_config(config);
    rydtwin::CompileRequest req = request_from_config(cfg, seed);
    rydtwin::CompileResult res = rydtwin::compile(req);
    json circ = rydtwin::circuit_to_json(res.circuit);
    stamp(circ, cfg, "rydtwin-circuit/1");
    json report = res.report;
    const double wall = report.value("wall_ms", 0.0);
    report.erase("wall_ms");
    stamp(report, cfg, "rydtwin-compile-report/1");
    fs::create_directories(out_dir);
    rydtwin::save_json(circ, (out_dir / "circuit.json").string());
    rydtwin::save_json(report, (out_dir / "compile_report.json").string());
    append_log(out_dir, "compile wall_ms=" + std::to_string(wall));
    std::cerr << "compiled depth=" << res.circuit.depth() << "\n";
    return 0;
}

int cmd_lower(const std::string& config, const std::string& circuit_path,
              std::uint64_t seed, const fs::path& out_dir) {
    const json cfg = load_config(config);
    (void)seed;
    rydtwin::Circuit logical = rydtwin::circuit_from_json(
        rydtwin::load_json(circuit_path));
    const json& c = require(cfg, "compile");
    const rydtwin::Lattice lat = rydtwin::Lattice::build(logical.lattice);
    const rydtwin::DeviceParams dev = device_from_config(cfg);
    rydtwin::Circuit native = rydtwin::lower_to_native(
        logical, lat, require(c, "r_g_sq_in_a2").get<double>(), dev.phi,
        c.value("serial", false));
    json out = rydtwin::circuit_to_json(native);
    stamp(out, cfg, "rydtwin-circuit/1");
    fs::create_directories(out_dir);
    rydtwin::save_json(out, (out_dir / "native_circuit.json").string());
    std::cerr << "lowered depth=" << native.depth() << "\n";
    return 0;
}

int cmd_simulate(const std::string& config, const std::string& circuit_path,
                 const SimOptions& opt, const fs::path& out_dir) {
    const json cfg = config.empty() ? json::object() : load_config(config);
    rydtwin::Circuit c = rydtwin::circuit_from_json(rydtwin::load_json(circuit_path));
    const rydtwin::DeviceParams dev = device_from_config(cfg);
    const SimOutcome out = simulate_circuit(c, dev, opt);
    fs::create_directories(out_dir);
    json run = run_record_json(out.record);
    run["backend"] = opt.backend;
    run["open"] = opt.open_system;
    run["dt_us"] = opt.dt;
    run["f_ghz"] = out.f;
    run["norm2"] = out.state.norm2();
    stamp(run, cfg, "rydtwin-run/1");
    rydtwin::save_json(run, (out_dir / "run.json").string());
    if (!out.record.t.empty()) write_timeseries(out_dir / "timeseries.csv", out.record);
    std::cerr << "F=" << out.f << " P_R=" << run.value("p_r", 0.0)
              << " T_R=" << run.value("t_r_us", 0.0)
              << " norm2=" << out.state.norm2() << "\n";
    return 0;
}

int cmd_sample(const std::string& config, const std::string& circuit_path,
               long long shots, const std::string& scheme_name, std::uint64_t seed,
               const fs::path& out_dir) {
    const json cfg = config.empty() ? json::object() : load_config(config);
    rydtwin::Circuit c = rydtwin::circuit_from_json(rydtwin::load_json(circuit_path));
    const rydtwin::ReadoutScheme scheme = scheme_name == "single_state"
                                              ? rydtwin::ReadoutScheme::single_state
                                              : rydtwin::ReadoutScheme::two_state;
    const rydtwin::QutritState st = rydtwin::run_ideal(c);
    const rydtwin::Histogram hist = rydtwin::sample_measurements(st, shots, scheme, seed);
    fs::create_directories(out_dir);
    std::ofstream out(out_dir / "histogram.csv");
    out << "count0,count1,shots\n";
    for (const auto& [bin, n] : hist)
        out << bin.first << "," << bin.second << "," << n << "\n";
    const rydtwin::ReadoutReport rep =
        rydtwin::classify_readout(hist, st.n, scheme);
    json j = {{"shots", shots},
              {"scheme", scheme_name},
              {"seed", seed},
              {"ghz_mass", rep.ghz_mass},
              {"error_mass", rep.error_mass},
              {"coverage", rep.coverage}};
    stamp(j, cfg, "rydtwin-sample/1");
    rydtwin::save_json(j, (out_dir / "sample_report.json").string());
    std::cerr << "ghz_mass=" << rep.ghz_mass << " coverage=" << rep.coverage << "\n";
    return 0;
}

int cmd_analyze(const std::string& config, const std::string& circuit_path,
                const SimOptions& opt_in, const fs::path& out_dir) {
    const json cfg = config.empty() ? json::object() : load_config(config);
    rydtwin::Circuit c = rydtwin::circuit_from_json(rydtwin::load_json(circuit_path));
    const rydtwin::DeviceParams dev = device_from_config(cfg);
    SimOptions opt = opt_in;
    opt.backend = "pulse";
    opt.snapshots = true;
    const SimOutcome pulse = simulate_circuit(c, dev, opt);
    std::vector<rydtwin::QutritState> ideal_snaps;
    rydtwin::Circuit scheduled = c;
    rydtwin::assign_pulse_timeline(scheduled, opt.tau_layer_us);
    rydtwin::run_ideal(scheduled, &ideal_snaps);
    const auto layers =
        rydtwin::per_layer_infidelity(pulse.record.snapshots, ideal_snaps, scheduled);
    fs::create_directories(out_dir);
    std::ofstream csv(out_dir / "per_layer.csv");
    csv << "layer,I,I_per_gate\n";
    for (const auto& li : layers)
        csv << li.layer << "," << rydtwin::format_angle(li.i_layer) << ","
            << rydtwin::format_angle(li.i_per_gate) << "\n";
    int n_cz = 0;
    for (const auto& li : layers) n_cz += li.n_cz;
    const rydtwin::FidelityReport rep =
        rydtwin::make_fidelity_report(pulse.f, n_cz, pulse.state.norm2());
    rydtwin::DephasingModel dm;
    dm.t2_ms = dev.t2_ms;
    dm.n = scheduled.n_sites();
    dm.tau_layer_us = scheduled.tau_layer_us;
    dm.start_times_us = rydtwin::dephasing_start_times(scheduled);
    json j = {{"f", rep.f},
              {"infidelity", rep.infidelity},
              {"n_cz", rep.n_cz},
              {"f_avg", rep.f_avg},
              {"norm_loss", rep.norm_loss},
              {"f_dephasing", rydtwin::dephasing_fidelity(
                                  dm, scheduled.depth() * scheduled.tau_layer_us)}};
    stamp(j, cfg, "rydtwin-analysis/1");
    rydtwin::save_json(j, (out_dir / "analysis.json").string());
    std::cerr << "F=" << rep.f << " F_avg=" << rep.f_avg << "\n";
    return 0;
}

int cmd_sweep(const std::string& config, std::uint64_t seed, const SimOptions& opt,
              const fs::path& out_dir) {
    const json cfg = load_config(config);
    const std::vector<double> rg_list =
        require(require(cfg, "sweep"), "r_g_sq_list").get<std::vector<double>>();
    fs::create_directories(out_dir);
    std::ofstream csv(out_dir / "sweep.csv");
    csv << "r_g_sq_in_a2,D,F,I,P_R,T_R,norm2,status\n";
    for (double rg2 : rg_list) {
        try {
            rydtwin::CompileRequest req = request_from_config(cfg, seed);
            req.r_g_sq_in_a2 = rg2;
            rydtwin::CompileResult res = rydtwin::compile(req);
            const rydtwin::DeviceParams dev = device_from_config(cfg);
            const SimOutcome out = simulate_circuit(res.circuit, dev, opt);
            rydtwin::RydbergObservables obs;
            if (!out.record.t.empty()) obs = rydtwin::rydberg_observables(out.record);
            csv << rg2 << "," << res.circuit.depth() << ","
                << rydtwin::format_angle(out.f) << ","
                << rydtwin::format_angle(1 - out.f) << ","
                << rydtwin::format_angle(obs.p_r) << ","
                << rydtwin::format_angle(obs.t_r) << ","
                << rydtwin::format_angle(out.state.norm2()) << ",ok\n";
        } catch (const std::exception& e) {
            std::cerr << "sweep r_g_sq=" << rg2 << " failed: " << e.what() << "\n";
            csv << rg2 << ",,,,,,,failed\n";
        }
    }
    append_log(out_dir, "sweep config_hash=" + rydtwin::config_hash(cfg));
    return 0;
}

int cmd_calibrate(const std::string& config, const fs::path& out_dir) {
    const json cfg = config.empty() ? json::object() : load_config(config);
    rydtwin::DeviceParams p;  // base profile; calibration fills the pulse
    if (cfg.contains("device")) p = rydtwin::device_from_json(cfg.at("device"));
    const rydtwin::CalibResult cal = rydtwin::calibrate_cz(p);
    p.delta0_rad_us = cal.delta0_rad_us;
    p.delta_max_rad_us = cal.delta_max_rad_us;
    p.sigma_us = cal.sigma_us;
    p.t_center_us = cal.t_center_us;
    p.phi = cal.phi;
    p.f_cz = cal.f_cz;
    p.gamma_mhz = rydtwin::fit_gamma(p);
    json j = rydtwin::device_to_json(p);
    stamp(j, cfg, "rydtwin-device/1");
    fs::create_directories(out_dir);
    rydtwin::save_json(j, (out_dir / "device.json").string());
    std::cerr << "F_CZ=" << cal.f_cz << " phi=" << cal.phi
              << " gamma_mhz=" << p.gamma_mhz << "\n";
    return 0;
}

int cmd_report(const fs::path& out_dir) {
    json report = json::object();
    for (const char* name : {"circuit.json", "compile_report.json", "run.json",
                             "analysis.json", "sample_report.json", "device.json"}) {
        const fs::path p = out_dir / name;
        if (!fs::exists(p)) continue;
        json j = rydtwin::load_json(p.string());
        if (std::string(name) == "circuit.json") {
            rydtwin::Circuit c = rydtwin::circuit_from_json(j);
            const rydtwin::CircuitStats st = rydtwin::circuit_stats(
                c, c.tau_layer_us > 0 ? c.tau_layer_us : 2.0);
            report["circuit"] = {{"D", st.D},     {"G", st.G},   {"G1", st.G1},
                                 {"G2", st.G2},   {"O1", st.O1}, {"O2", st.O2},
                                 {"MAX1", st.MAX1}, {"MAX2", st.MAX2}, {"QGS", st.QGS}};
        } else {
            std::string key = name;
            key = key.substr(0, key.find('.'));
            report[key] = j;
        }
    }
    if (report.empty()) throw rydtwin::ConfigError("no artifacts found in " +
                                                   out_dir.string());
    report["schema"] = "rydtwin-report/1";
    rydtwin::save_json(report, (out_dir / "report.json").string());
    std::cerr << "report written\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"rydtwin: digital twin of a 2D Rydberg-atom quantum computer"};
    app.require_subcommand(1);

    if (const char* env = std::getenv("RYDTWIN_THREADS"))
        g_threads = std::max(1, std::atoi(env));
    (void)g_threads;

    std::string config, circuit_path, out_dir = "out", scheme = "two_state";
    std::uint64_t seed = 0;
    long long shots = 1000000;
    SimOptions opt;

    auto add_common = [&](CLI::App* sub, bool needs_circuit) {
        sub->add_option("--config", config, "config JSON path");
        sub->add_option("--seed", seed, "deterministic seed");
        sub->add_option("--out-dir", out_dir, "output directory");
        if (needs_circuit)
            sub->add_option("circuit", circuit_path, "circuit JSON path")->required();
    };

    CLI::App* c_compile = app.add_subcommand("compile", "search for a GHZ circuit");
    add_common(c_compile, false);
    CLI::App* c_lower = app.add_subcommand("lower", "lower a logical circuit to native");
    add_common(c_lower, true);
    CLI::App* c_sim = app.add_subcommand("simulate", "run a circuit on a backend");
    add_common(c_sim, true);
    c_sim->add_option("--backend", opt.backend, "ideal|pulse");
    c_sim->add_flag("--open", opt.open_system, "non-Hermitian decay");
    c_sim->add_option("--dt", opt.dt, "integrator step (us)");
    c_sim->add_option("--tau-layer", opt.tau_layer_us, "layer period (us)");
    CLI::App* c_sample = app.add_subcommand("sample", "projective measurements");
    add_common(c_sample, true);
    c_sample->add_option("--shots", shots, "number of shots");
    c_sample->add_option("--scheme", scheme, "two_state|single_state");
    CLI::App* c_analyze = app.add_subcommand("analyze", "per-layer infidelity report");
    add_common(c_analyze, true);
    c_analyze->add_option("--dt", opt.dt, "integrator step (us)");
    c_analyze->add_flag("--open", opt.open_system, "non-Hermitian decay");
    c_analyze->add_option("--tau-layer", opt.tau_layer_us, "layer period (us)");
    CLI::App* c_sweep = app.add_subcommand("sweep", "compile+simulate over r_g list");
    add_common(c_sweep, false);
    c_sweep->add_option("--backend", opt.backend, "ideal|pulse");
    c_sweep->add_flag("--open", opt.open_system, "non-Hermitian decay");
    c_sweep->add_option("--dt", opt.dt, "integrator step (us)");
    CLI::App* c_calib = app.add_subcommand("calibrate", "calibrate the CZ pulse");
    add_common(c_calib, false);
    CLI::App* c_report = app.add_subcommand("report", "aggregate artifacts in out-dir");
    add_common(c_report, false);

    CLI11_PARSE(app, argc, argv);
    opt.seed = seed;

    try {
        if (c_compile->parsed()) return cmd_compile(config, seed, out_dir);
        if (c_lower->parsed()) return cmd_lower(config, circuit_path, seed, out_dir);
        if (c_sim->parsed()) return cmd_simulate(config, circuit_path, opt, out_dir);
        if (c_sample->parsed())
            return cmd_sample(config, circuit_path, shots, scheme, seed, out_dir);
        if (c_analyze->parsed()) return cmd_analyze(config, circuit_path, opt, out_dir);
        if (c_sweep->parsed()) return cmd_sweep(config, seed, opt, out_dir);
        if (c_calib->parsed()) return cmd_calibrate(config, out_dir);
        if (c_report->parsed()) return cmd_report(out_dir);
    } catch (const rydtwin::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const rydtwin::SearchError& e) {
        std::cerr << "search error: " << e.what() << "\n";
        return 3;
    } catch (const rydtwin::MemoryGuardError& e) {
        std::cerr << "memory guard: " << e.what() << "\n";
        return 4;
    } catch (const rydtwin::InstabilityError& e) {
        std::cerr << "instability: " << e.what() << "\n";
        return 5;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
