#pragma once
#include <string>

#include <json.hpp>

#include "rydtwin/circuit.hpp"

namespace rydtwin {

using nlohmann::json;

// 17-significant-digit decimal string; round-trips doubles bit-exactly.
std::string format_angle(double v);
double parse_angle(const std::string& s);

json lattice_spec_to_json(const LatticeSpec& spec);
LatticeSpec lattice_spec_from_json(const json& j);

// Schema "rydtwin-circuit/1".
json circuit_to_json(const Circuit& c);
Circuit circuit_from_json(const json& j);

void save_json(const json& j, const std::string& path);
json load_json(const std::string& path);

// FNV-1a 64 over the canonical dump, hex-encoded.
std::string config_hash(const json& j);

} // namespace rydtwin
