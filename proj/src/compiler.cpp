#include "rydtwin/compiler.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>

#include "rydtwin/engine.hpp"  // splitmix64
#include "rydtwin/errors.hpp"

namespace rydtwin {

namespace {

std::uint64_t hash_config(const SearchConfiguration& c, std::uint64_t seed) {
    std::uint64_t h = splitmix64(seed ^ 0x243F6A8885A308D3ull);
    for (size_t i = 0; i < c.entangled.size(); ++i)
        h = splitmix64(h ^ (c.entangled[i] ? 2 * i + 1 : 2 * i));
    for (int l : c.lam) h = splitmix64(h ^ static_cast<std::uint64_t>(l + 5000));
    return h;
}

struct Metric {
    int n_ent;
    double com_dist;  // center-of-mass distance to lattice center
    double spread;    // mean distance from own center of mass
};

Metric config_metric(const SearchConfiguration& c, const Lattice& lat) {
    double cx = 0, cy = 0;
    int n = 0;
    for (size_t i = 0; i < c.entangled.size(); ++i)
        if (c.entangled[i]) {
            cx += lat.sites()[i].x;
            cy += lat.sites()[i].y;
            ++n;
        }
    cx /= n;
    cy /= n;
    const auto [lx, ly] = lat.center();
    double sp = 0;
    for (size_t i = 0; i < c.entangled.size(); ++i)
        if (c.entangled[i]) sp += std::hypot(lat.sites()[i].x - cx, lat.sites()[i].y - cy);
    return {n, std::hypot(cx - lx, cy - ly), sp / n};
}

bool pairs_compatible(const std::pair<int, int>& p, const std::pair<int, int>& q,
                      const Lattice& lat, double r_g_sq_in_a2) {
    if (p.first == q.first || p.first == q.second || p.second == q.first ||
        p.second == q.second)
        return false;
    for (int x : {p.first, p.second})
        for (int y : {q.first, q.second})
            if (lat.dist2_in_a2(x, y) < r_g_sq_in_a2 - 1e-9) return false;
    return true;
}

void extend_sets(const std::vector<std::pair<int, int>>& pairs, const Lattice& lat,
                 double rg2, std::vector<int>& cur, const std::vector<int>& cand,
                 std::set<std::vector<int>>& out) {
    bool leaf = true;
    for (size_t i = 0; i < cand.size(); ++i) {
        std::vector<int> next_cand;
        for (size_t j = i + 1; j < cand.size(); ++j)
            if (pairs_compatible(pairs[cand[i]], pairs[cand[j]], lat, rg2))
                next_cand.push_back(cand[j]);
        cur.push_back(cand[i]);
        extend_sets(pairs, lat, rg2, cur, next_cand, out);
        cur.pop_back();
        leaf = false;
    }
    if (leaf && !cur.empty()) out.insert(cur);
}

} // namespace

std::vector<std::pair<int, int>> enumerate_pairs(const Lattice& lat,
                                                 const std::vector<bool>& entangled,
                                                 const std::vector<int>& blocked) {
    std::vector<std::pair<int, int>> pairs;
    for (int c = 0; c < lat.size(); ++c) {
        if (!entangled[c] || blocked[c] > 0) continue;
        for (int t : lat.neighbors(c))
            if (!entangled[t] && blocked[t] <= 0) pairs.emplace_back(c, t);
    }
    return pairs;
}

std::vector<std::vector<int>> enumerate_parallel_sets(
    const std::vector<std::pair<int, int>>& pairs, const Lattice& lat,
    double r_g_sq_in_a2, int cap, std::uint64_t seed) {
    if (pairs.empty()) return {};
    std::vector<std::vector<int>> result;
    if (static_cast<int>(pairs.size()) <= 20) {
        std::set<std::vector<int>> raw;
        std::vector<int> cur, cand(pairs.size());
        std::iota(cand.begin(), cand.end(), 0);
        extend_sets(pairs, lat, r_g_sq_in_a2, cur, cand, raw);
        // drop non-maximal sets (subsets of another)
        for (const auto& s : raw) {
            bool maximal = true;
            for (const auto& o : raw)
                if (&o != &s && o.size() > s.size() &&
                    std::includes(o.begin(), o.end(), s.begin(), s.end())) {
                    maximal = false;
                    break;
                }
            if (maximal) result.push_back(s);
        }
    } else {
        std::set<std::vector<int>> uniq;
        for (int k = 0; k < cap; ++k) {
            std::vector<int> order(pairs.size());
            std::iota(order.begin(), order.end(), 0);
            std::uint64_t h = splitmix64(seed ^ (0x9E3779B97F4A7C15ull * (k + 1)));
            for (size_t i = order.size(); i > 1; --i) {
                h = splitmix64(h);
                std::swap(order[i - 1], order[h % i]);
            }
            std::vector<int> s;
            for (int idx : order) {
                bool ok = true;
                for (int j : s)
                    if (!pairs_compatible(pairs[idx], pairs[j], lat, r_g_sq_in_a2)) {
                        ok = false;
                        break;
                    }
                if (ok) s.push_back(idx);
            }
            std::sort(s.begin(), s.end());
            uniq.insert(s);
        }
        result.assign(uniq.begin(), uniq.end());
    }
    std::sort(result.begin(), result.end(), [](const auto& a, const auto& b) {
        if (a.size() != b.size()) return a.size() > b.size();
        return a < b;
    });
    if (static_cast<int>(result.size()) > cap) result.resize(cap);
    return result;
}

std::vector<SearchConfiguration> truncate_frontier(std::vector<SearchConfiguration> configs,
                                                   const TruncationPolicy& policy,
                                                   const Lattice& lat, std::uint64_t seed) {
    if (configs.empty()) return configs;
    struct Ranked {
        Metric m;
        std::uint64_t h;
        size_t idx;
    };
    std::vector<Ranked> ranked;
    ranked.reserve(configs.size());
    int max_bin = 0;
    for (size_t i = 0; i < configs.size(); ++i) {
        ranked.push_back({config_metric(configs[i], lat), hash_config(configs[i], seed), i});
        max_bin = std::max(max_bin, ranked.back().m.n_ent);
    }
    std::sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
        if (a.m.n_ent != b.m.n_ent) return a.m.n_ent > b.m.n_ent;
        if (a.m.com_dist != b.m.com_dist) return a.m.com_dist < b.m.com_dist;
        if (a.m.spread != b.m.spread) return a.m.spread > b.m.spread;
        return a.h < b.h;
    });
    // drop lagging bins, but keep at least keep_fraction of the frontier
    const size_t min_keep = static_cast<size_t>(
        std::ceil(policy.keep_fraction * static_cast<double>(ranked.size())));
    size_t cut = ranked.size();
    while (cut > min_keep && ranked[cut - 1].m.n_ent < max_bin - policy.lag) --cut;
    cut = std::min(cut, static_cast<size_t>(std::max(1, policy.max_geometries)));
    std::vector<SearchConfiguration> out;
    out.reserve(cut);
    for (size_t i = 0; i < cut; ++i) out.push_back(std::move(configs[ranked[i].idx]));
    return out;
}

namespace {

// Graph center of a group: site minimizing eccentricity over in-group adjacency.
int group_root(const Lattice& lat, const std::vector<int>& group) {
    std::vector<bool> in(lat.size(), false);
    for (int s : group) in[s] = true;
    int best = -1, best_ecc = 1 << 30;
    for (int s : group) {
        std::map<int, int> dist{{s, 0}};
        std::vector<int> q{s};
        for (size_t h = 0; h < q.size(); ++h)
            for (int t : lat.neighbors(q[h]))
                if (in[t] && !dist.count(t)) {
                    dist[t] = dist[q[h]] + 1;
                    q.push_back(t);
                }
        if (static_cast<int>(dist.size()) != static_cast<int>(group.size()))
            throw std::invalid_argument("local GHZ group is not connected");
        int ecc = 0;
        for (const auto& [_, d] : dist) ecc = std::max(ecc, d);
        if (ecc < best_ecc || (ecc == best_ecc && s < best)) {
            best_ecc = ecc;
            best = s;
        }
    }
    return best;
}

Circuit emit_logical(const Plan& plan, const Lattice& lat, double rg2) {
    Circuit c;
    c.level = Level::logical;
    c.lattice = lat.spec();
    c.r_g_sq_in_a2 = rg2;
    Layer h_layer;
    for (int r : plan.roots) h_layer.gates.push_back(hadamard(r));
    append_layer(c, std::move(h_layer));
    for (const PlanRound& round : plan.rounds) {
        Layer l;
        for (const PlanCz& z : round.czs) l.gates.push_back(cnot(z.control, z.target));
        append_layer(c, std::move(l));
    }
    return c;
}

} // namespace

CompileResult compile(const CompileRequest& request) {
    const auto t0 = std::chrono::steady_clock::now();
    Lattice lat = Lattice::build(request.lattice);
    if (request.r_g_sq_in_a2 < 1.0 - 1e-9)
        throw std::invalid_argument("r_g must be at least the lattice spacing");
    const int n = lat.size();
    const int spacing = request.mode == CompileMode::native ? 4 : 1;

    // site -> group id (-1 = unconstrained / global)
    std::vector<int> gid(n, request.target == CompileTarget::global_ghz ? 0 : -1);
    std::vector<std::vector<int>> groups = request.groups;
    if (request.target == CompileTarget::local_ghz) {
        if (groups.empty()) throw std::invalid_argument("local_ghz requires groups");
        for (size_t g = 0; g < groups.size(); ++g)
            for (int s : groups[g]) {
                if (s < 0 || s >= n) throw std::invalid_argument("group site out of range");
                if (gid[s] != -1) throw std::invalid_argument("groups must be disjoint");
                gid[s] = static_cast<int>(g);
            }
    }

    std::vector<SearchConfiguration> frontier;
    auto fresh = [&](const std::vector<int>& roots) {
        SearchConfiguration c;
        c.entangled.assign(n, false);
        c.lam.assign(n, SearchConfiguration::kNever);
        c.role.assign(n, 0);
        for (int r : roots) {
            c.entangled[r] = true;
            c.lam[r] = spacing == 4 ? 3 : 0;  // H occupies layers 1..3 (native)
            c.plan.roots.push_back(r);
        }
        return c;
    };
    int target_count = n;
    if (request.target == CompileTarget::global_ghz) {
        for (int r : unique_sites_under_symmetry(lat)) frontier.push_back(fresh({r}));
    } else {
        std::vector<int> roots;
        target_count = 0;
        for (const auto& g : groups) {
            roots.push_back(group_root(lat, g));
            target_count += static_cast<int>(g.size());
        }
        frontier.push_back(fresh(roots));
    }

    nlohmann::json rounds_report = nlohmann::json::array();
    const SearchConfiguration* best = nullptr;
    std::vector<SearchConfiguration> done;
    int ell = spacing == 4 ? 3 : 0;
    while (done.empty() && ell < 50 * n + 50) {
        ++ell;
        std::map<std::pair<std::vector<bool>, std::vector<int>>, SearchConfiguration> next;
        for (const SearchConfiguration& cfg : frontier) {
            std::vector<int> blocked(n, 0);
            for (int s = 0; s < n; ++s)
                if (cfg.lam[s] > SearchConfiguration::kNever)
                    blocked[s] = std::max(0, cfg.lam[s] + spacing - ell);
            auto pairs = enumerate_pairs(lat, cfg.entangled, blocked);
            if (request.target == CompileTarget::local_ghz)
                pairs.erase(std::remove_if(pairs.begin(), pairs.end(),
                                           [&](const auto& p) {
                                               return gid[p.first] == -1 ||
                                                      gid[p.first] != gid[p.second];
                                           }),
                            pairs.end());
            auto sets = enumerate_parallel_sets(pairs, lat, request.r_g_sq_in_a2,
                                                request.set_cap, request.seed);
            if (request.aggressive && !sets.empty()) sets.resize(1);
            // expansion children, plus a "wait" child that skips this layer
            std::vector<SearchConfiguration> children;
            for (const auto& st : sets) {
                SearchConfiguration ch = cfg;
                PlanRound round{ell, {}};
                for (int idx : st) {
                    const auto [c, t] = pairs[idx];
                    ch.entangled[t] = true;
                    ch.lam[c] = ell;
                    ch.lam[t] = ell;
                    ch.role[c] = 1;
                    ch.role[t] = 2;
                    round.czs.push_back({c, t, GateKind::CNOT});
                }
                ch.plan.rounds.push_back(std::move(round));
                children.push_back(std::move(ch));
            }
            children.push_back(cfg);
            for (SearchConfiguration& ch : children) {
                if (std::count(ch.entangled.begin(), ch.entangled.end(), true) ==
                    target_count) {
                    done.push_back(std::move(ch));
                    continue;
                }
                auto key = std::make_pair(ch.entangled, ch.lam);
                next.emplace(std::move(key), std::move(ch));
            }
        }
        frontier.clear();
        for (auto& [_, c] : next) frontier.push_back(std::move(c));
        const size_t before = frontier.size();
        frontier = truncate_frontier(std::move(frontier), request.policy, lat, request.seed);
        rounds_report.push_back({{"layer", ell},
                                 {"frontier", before},
                                 {"kept", frontier.size()},
                                 {"truncated", before - frontier.size()}});
        if (frontier.empty() && done.empty())
            throw SearchError("compile search exhausted without a solution");
    }
    if (done.empty()) throw SearchError("compile search hit the iteration limit");

    // pick the completed configuration with the smallest estimated native depth
    auto depth_estimate = [&](const SearchConfiguration& c) {
        int d = 0;
        for (int s = 0; s < n; ++s)
            if (c.lam[s] > SearchConfiguration::kNever)
                d = std::max(d, c.lam[s] + (c.role[s] == 2 ? 3 : (c.role[s] == 1 ? 1 : 0)));
        return d;
    };
    for (const SearchConfiguration& c : done)
        if (!best || depth_estimate(c) < depth_estimate(*best)) best = &c;

    CompileResult res;
    if (request.mode == CompileMode::native)
        res.circuit = lower_plan(best->plan, lat, request.r_g_sq_in_a2, request.phi,
                                 request.serial);
    else
        res.circuit = emit_logical(best->plan, lat, request.r_g_sq_in_a2);
    const double ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
    res.report = {{"depth", res.circuit.depth()},
                  {"cz_rounds", best->plan.rounds.size()},
                  {"solutions", done.size()},
                  {"rounds", rounds_report},
                  {"wall_ms", ms}};
    res.circuit.metadata["compiler_seed"] = std::to_string(request.seed);
    return res;
}

CompileResult compile_local_ghz(CompileRequest request, std::vector<std::vector<int>> groups) {
    request.target = CompileTarget::local_ghz;
    request.groups = std::move(groups);
    return compile(request);
}

} // namespace rydtwin
