#include "rydtwin/json_io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>

#include "rydtwin/errors.hpp"

namespace rydtwin {

std::string format_angle(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_angle(const std::string& s) {
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str()) throw ConfigError("bad angle string: " + s);
    return v;
}

json lattice_spec_to_json(const LatticeSpec& spec) {
    Lattice lat = Lattice::build(spec);
    json sites = json::array();
    for (const Site& s : lat.sites())
        sites.push_back({{"index", s.index}, {"row", s.row}, {"col", s.col},
                         {"x_um", s.x}, {"y_um", s.y}});
    return {{"kind", to_string(spec.kind)},
            {"rows", spec.rows},
            {"cols", spec.cols == 0 ? spec.rows : spec.cols},
            {"spacing_um", spec.spacing},
            {"sites", sites}};
}

LatticeSpec lattice_spec_from_json(const json& j) {
    LatticeSpec spec;
    spec.kind = lattice_kind_from_string(j.at("kind").get<std::string>());
    spec.rows = j.at("rows").get<int>();
    spec.cols = j.value("cols", 0);
    spec.spacing = j.at("spacing_um").get<double>();
    return spec;
}

static json gate_to_json(const Gate& g) {
    json sites = json::array({g.s0});
    if (g.two_site()) sites.push_back(g.s1);
    json out = {{"kind", to_string(g.kind)}, {"sites", sites}};
    if (g.kind == GateKind::RX || g.kind == GateKind::RZ || g.kind == GateKind::CZ_PHI)
        out["angle"] = format_angle(g.angle);
    return out;
}

static Gate gate_from_json(const json& j) {
    Gate g;
    g.kind = gate_kind_from_string(j.at("kind").get<std::string>());
    const auto& sites = j.at("sites");
    g.s0 = sites.at(0).get<int>();
    if (sites.size() > 1) g.s1 = sites.at(1).get<int>();
    if (j.contains("angle")) g.angle = parse_angle(j.at("angle").get<std::string>());
    return g;
}

json circuit_to_json(const Circuit& c) {
    json layers = json::array();
    for (const Layer& layer : c.layers) {
        json lj = json::array();
        for (const Gate& g : layer.gates) lj.push_back(gate_to_json(g));
        layers.push_back(lj);
    }
    json out = {{"schema", "rydtwin-circuit/1"},
                {"level", to_string(c.level)},
                {"lattice", lattice_spec_to_json(c.lattice)},
                {"r_g_sq_in_a2", c.r_g_sq_in_a2},
                {"phi", format_angle(c.phi)},
                {"metadata", c.metadata},
                {"layers", layers}};
    if (c.tau_layer_us > 0) out["tau_layer_us"] = format_angle(c.tau_layer_us);
    return out;
}

Circuit circuit_from_json(const json& j) {
    if (j.value("schema", "") != "rydtwin-circuit/1")
        throw ConfigError("unsupported circuit schema");
    Circuit c;
    c.level = level_from_string(j.at("level").get<std::string>());
    c.lattice = lattice_spec_from_json(j.at("lattice"));
    c.r_g_sq_in_a2 = j.at("r_g_sq_in_a2").get<double>();
    c.phi = parse_angle(j.value("phi", "0"));
    if (j.contains("tau_layer_us"))
        c.tau_layer_us = parse_angle(j.at("tau_layer_us").get<std::string>());
    if (j.contains("metadata"))
        c.metadata = j.at("metadata").get<std::map<std::string, std::string>>();
    for (const auto& lj : j.at("layers")) {
        Layer layer;
        for (const auto& gj : lj) layer.gates.push_back(gate_from_json(gj));
        append_layer(c, std::move(layer));
    }
    return c;
}

void save_json(const json& j, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw ConfigError("cannot write " + path);
    f << j.dump(2) << "\n";
}

json load_json(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot read " + path);
    try {
        return json::parse(f);
    } catch (const std::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

std::string config_hash(const json& j) {
    const std::string s = j.dump();
    unsigned long long h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", h);
    return buf;
}

} // namespace rydtwin
