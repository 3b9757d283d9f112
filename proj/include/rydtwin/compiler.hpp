#pragma once
#include <cstdint>
#include <utility>
#include <vector>

#include "json.hpp"
#include "rydtwin/circuit.hpp"
#include "rydtwin/lattice.hpp"
#include "rydtwin/scheduler.hpp"

namespace rydtwin {

struct TruncationPolicy {
    double keep_fraction = 0.5;   // minimum fraction of the frontier retained by bin drops
    int max_geometries = 600;     // hard cap on frontier size
    int lag = 2;                  // bins more than `lag` below the largest bin are dropped
};

enum class CompileMode { logical, native };
enum class CompileTarget { global_ghz, local_ghz };

struct CompileRequest {
    LatticeSpec lattice;
    double r_g_sq_in_a2 = 8.0;
    CompileMode mode = CompileMode::native;
    CompileTarget target = CompileTarget::global_ghz;
    std::vector<std::vector<int>> groups;  // for local_ghz: disjoint connected site sets
    TruncationPolicy policy;
    std::uint64_t seed = 0;
    double phi = 0.0;            // CZ_PHI angle stamped on native output
    bool aggressive = false;     // keep only the largest parallel set per expansion
    int set_cap = 64;            // max parallel sets enumerated per configuration
    bool serial = false;         // native lowering: one gate per layer
};

struct CompileResult {
    Circuit circuit;
    nlohmann::json report;  // per-round frontier sizes, truncation counts, depth, wall time
};

// Search state at CZ-round granularity: which sites are entangled, and the
// layer of each site's last CZ (lam); blocked(site) = max(0, lam+spacing-l).
struct SearchConfiguration {
    std::vector<bool> entangled;
    std::vector<int> lam;          // last CZ layer per site; kNever if none
    std::vector<int> role;         // 0 none, 1 control-last, 2 target-last
    Plan plan;
    static constexpr int kNever = -1000;
};

// Nearest-neighbor pairs (control entangled & unblocked, target fresh & unblocked).
std::vector<std::pair<int, int>> enumerate_pairs(const Lattice& lat,
                                                 const std::vector<bool>& entangled,
                                                 const std::vector<int>& blocked);

// Maximal pairwise-compatible subsets (disjoint sites, cross-pair min distance
// >= r_g), as indices into `pairs`. Full enumeration for ground sets <= 20,
// otherwise greedy construction from `cap` seed-keyed shuffles; at most cap sets.
std::vector<std::vector<int>> enumerate_parallel_sets(
    const std::vector<std::pair<int, int>>& pairs, const Lattice& lat,
    double r_g_sq_in_a2, int cap, std::uint64_t seed = 0);

// Bin by |entangled|, drop lagging bins subject to keep_fraction, rank within
// bins by (center-of-mass closeness to lattice center, larger spread,
// seed-keyed hash), cap at max_geometries.
std::vector<SearchConfiguration> truncate_frontier(std::vector<SearchConfiguration> configs,
                                                   const TruncationPolicy& policy,
                                                   const Lattice& lat, std::uint64_t seed);

CompileResult compile(const CompileRequest& request);

// Convenience wrapper: local GHZ targets on explicit groups.
CompileResult compile_local_ghz(CompileRequest request, std::vector<std::vector<int>> groups);

} // namespace rydtwin
