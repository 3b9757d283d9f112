#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "rydtwin/circuit.hpp"
#include "rydtwin/engine.hpp"
#include "rydtwin/json_io.hpp"

using namespace rydtwin;
using cd = std::complex<double>;

namespace {

constexpr double kPi = 3.14159265358979323846;

// 4x4 qubit-subspace unitary of a two-site gate sequence via the ideal backend;
// column order |00>,|01>,|10>,|11> with (control, target) = (site 0, site 1).
std::array<std::array<cd, 4>, 4> two_qubit_unitary(const std::vector<Gate>& gates) {
    std::array<std::array<cd, 4>, 4> u{};
    for (int c = 0; c < 4; ++c) {
        QutritState st = QutritState::basis(2, {c >> 1, c & 1});
        for (const Gate& g : gates) apply_gate(st, g);
        for (int r = 0; r < 4; ++r) u[r][c] = st.amp[(r >> 1) + 3 * (r & 1)];
    }
    return u;
}

// max entrywise deviation after aligning global phase on the largest entry
double phase_aligned_dev(const std::array<std::array<cd, 4>, 4>& u,
                         const std::array<std::array<cd, 4>, 4>& v) {
    cd ph = 0;
    double best = 0;
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c)
            if (std::abs(v[r][c]) > best) {
                best = std::abs(v[r][c]);
                ph = u[r][c] / v[r][c];
            }
    ph /= std::abs(ph);
    double dev = 0;
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) dev = std::max(dev, std::abs(u[r][c] - ph * v[r][c]));
    return dev;
}

} // namespace

TEST_CASE("hadamard decomposition") {
    const auto gates = decompose_hadamard(0);
    REQUIRE(gates.size() == 3);
    CHECK(gates[0].kind == GateKind::RZ);
    CHECK(gates[1].kind == GateKind::RX);
    CHECK(gates[2].kind == GateKind::RZ);

    QutritState st = QutritState::basis(1, {0});
    for (const Gate& g : gates) apply_gate(st, g);
    CHECK(std::abs(std::abs(st.amp[0]) - 1 / std::sqrt(2.0)) < 1e-12);
    CHECK(std::abs(st.amp[0] - st.amp[1]) < 1e-12);  // equal phase on |0>,|1>

    // H twice = identity up to global phase
    for (const Gate& g : gates) apply_gate(st, g);
    CHECK(std::abs(std::abs(st.amp[0]) - 1.0) < 1e-12);
    CHECK(std::abs(st.amp[1]) < 1e-12);

    // matrix check against H entries
    QutritState s0 = QutritState::basis(1, {0}), s1 = QutritState::basis(1, {1});
    for (const Gate& g : gates) apply_gate(s0, g);
    for (const Gate& g : gates) apply_gate(s1, g);
    const double r = 1 / std::sqrt(2.0);
    const cd ph = s0.amp[0] / r;
    CHECK(std::abs(std::abs(ph) - 1.0) < 1e-12);
    CHECK(std::abs(s0.amp[0] - ph * r) < 1e-12);
    CHECK(std::abs(s0.amp[1] - ph * r) < 1e-12);
    CHECK(std::abs(s1.amp[0] - ph * r) < 1e-12);
    CHECK(std::abs(s1.amp[1] + ph * r) < 1e-12);
}

TEST_CASE("native CNOT decomposition equals CNOT for any phi") {
    const std::array<std::array<cd, 4>, 4> cnot_mat = {{{1, 0, 0, 0},
                                                        {0, 1, 0, 0},
                                                        {0, 0, 0, 1},
                                                        {0, 0, 1, 0}}};
    for (double phi : {-1.931268, 0.0, 0.7, 2.5}) {
        const auto gates = decompose_cnot_native(0, 1, phi);
        REQUIRE(gates.size() == 11);
        int n_cz = 0;
        for (const Gate& g : gates)
            if (g.kind == GateKind::CZ_PHI) ++n_cz;
        CHECK(n_cz == 1);
        CHECK(phase_aligned_dev(two_qubit_unitary(gates), cnot_mat) < 1e-10);
    }
    // |00> is fixed up to global phase
    QutritState st = QutritState::basis(2, {0, 0});
    for (const Gate& g : decompose_cnot_native(0, 1, 0.3)) apply_gate(st, g);
    CHECK(std::abs(std::abs(st.amp[0]) - 1.0) < 1e-12);
}

TEST_CASE("native CZ decomposition equals ideal CZ") {
    const std::array<std::array<cd, 4>, 4> cz_mat = {{{1, 0, 0, 0},
                                                      {0, 1, 0, 0},
                                                      {0, 0, 1, 0},
                                                      {0, 0, 0, -1}}};
    for (double phi : {-1.931268, 1.1})
        CHECK(phase_aligned_dev(two_qubit_unitary(decompose_cz_native(0, 1, phi)),
                                cz_mat) < 1e-10);
}

TEST_CASE("layer disjointness enforced") {
    Circuit c;
    c.lattice = {LatticeKind::square, 1, 4, 3.0};
    CHECK_THROWS_AS(append_layer(c, Layer{{rx(0, 1.0), rz(0, 1.0)}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(append_layer(c, Layer{{cz_phi(0, 1, 0.5), rx(1, 1.0)}}),
                    std::invalid_argument);
    append_layer(c, Layer{{cz_phi(0, 1, 0.5), rx(2, 1.0)}});
    CHECK(c.depth() == 1);
}

TEST_CASE("validate_parallel_layers") {
    Lattice lat = Lattice::build({LatticeKind::square, 1, 4, 3.0});
    Circuit c;
    c.lattice = lat.spec();
    c.level = Level::native;
    append_layer(c, Layer{{cz_phi(0, 1, 0.0), cz_phi(2, 3, 0.0)}});
    CHECK(validate_parallel_layers(c, lat, 4.0).size() == 1);  // cross distance a < 2a
    CHECK(validate_parallel_layers(c, lat, 1.0).empty());
}

TEST_CASE("circuit stats and depth bounds") {
    Circuit empty;
    const CircuitStats zs = circuit_stats(empty, 2.0);
    CHECK(zs.D == 0);
    CHECK(zs.G == 0);
    CHECK(zs.QGS == 0.0);

    Circuit c;
    c.lattice = {LatticeKind::square, 1, 2, 3.0};
    c.level = Level::native;
    append_layer(c, Layer{{rx(0, 1.0), rz(1, 1.0)}});
    append_layer(c, Layer{{cz_phi(0, 1, 0.5)}});
    const CircuitStats st = circuit_stats(c, 2.0);
    CHECK(st.D == 2);
    CHECK(st.G == 3);
    CHECK(st.G1 == 2);
    CHECK(st.G2 == 1);
    CHECK(st.O1 == doctest::Approx(1.0));
    CHECK(st.O2 == doctest::Approx(0.5));
    CHECK(st.MAX1 == 2);
    CHECK(st.MAX2 == 1);
    CHECK(st.QGS == doctest::Approx(3.0 / (2 * 2e-6)));

    CHECK(depth_bounds(4).d_min == 23);
    CHECK(depth_bounds(4).d_cz_serial == 30);
    CHECK(depth_bounds(4).d_serial == 168);
    CHECK(depth_bounds(6).d_min == 33);
    CHECK(depth_bounds(6).d_cz_serial == 50);
    CHECK(depth_bounds(6).d_serial == 388);
    CHECK(depth_bounds(8).d_min == 43);
    CHECK(depth_bounds(8).d_cz_serial == 78);
    CHECK(depth_bounds(8).d_serial == 696);
    CHECK_THROWS(depth_bounds(3));
}

TEST_CASE("json round trip is lossless") {
    Circuit c;
    c.level = Level::native;
    c.lattice = {LatticeKind::hexagonal, 2, 3, 3.0};
    c.r_g_sq_in_a2 = 8.0;
    c.tau_layer_us = 0.2;
    c.phi = -1.9312684634;
    c.metadata["cnot_oracle"] = "cnot";
    append_layer(c, Layer{{rx(0, kPi / 3), rz(1, -0.12345678901234567)}});
    append_layer(c, Layer{{cz_phi(0, 1, c.phi)}});
    const Circuit back = circuit_from_json(circuit_to_json(c));
    REQUIRE(back.depth() == c.depth());
    CHECK(back.level == c.level);
    CHECK(back.lattice.kind == c.lattice.kind);
    CHECK(back.r_g_sq_in_a2 == c.r_g_sq_in_a2);
    CHECK(back.tau_layer_us == c.tau_layer_us);
    CHECK(back.phi == c.phi);
    CHECK(back.metadata.at("cnot_oracle") == "cnot");
    for (int l = 0; l < c.depth(); ++l) {
        REQUIRE(back.layers[l].gates.size() == c.layers[l].gates.size());
        for (size_t g = 0; g < c.layers[l].gates.size(); ++g) {
            CHECK(back.layers[l].gates[g].kind == c.layers[l].gates[g].kind);
            CHECK(back.layers[l].gates[g].angle == c.layers[l].gates[g].angle);
            CHECK(back.layers[l].gates[g].s0 == c.layers[l].gates[g].s0);
            CHECK(back.layers[l].gates[g].s1 == c.layers[l].gates[g].s1);
        }
    }
}

TEST_CASE("angle strings round-trip doubles bit-exactly") {
    for (double v : {kPi, -kPi / 7, 0.1, 1e-17, -3.0 * kPi / 2})
        CHECK(parse_angle(format_angle(v)) == v);
}
