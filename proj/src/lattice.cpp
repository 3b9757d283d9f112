#include "rydtwin/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "rydtwin/errors.hpp"

namespace rydtwin {

std::string to_string(LatticeKind k) {
    return k == LatticeKind::square ? "square" : "hexagonal";
}

LatticeKind lattice_kind_from_string(const std::string& s) {
    if (s == "square") return LatticeKind::square;
    if (s == "hexagonal") return LatticeKind::hexagonal;
    throw ConfigError("unknown lattice kind: " + s);
}

Lattice Lattice::build(const LatticeSpec& spec_in) {
    LatticeSpec spec = spec_in;
    if (spec.cols == 0) spec.cols = spec.rows;
    if (spec.rows < 1 || spec.cols < 1)
        throw ConfigError("lattice dimensions must be >= 1");
    if (!(spec.spacing > 0.0))
        throw ConfigError("lattice spacing must be positive");

    Lattice lat;
    lat.spec_ = spec;
    const double a = spec.spacing;
    const double dy = a * std::sqrt(3.0) / 2.0;
    for (int r = 0; r < spec.rows; ++r) {
        for (int c = 0; c < spec.cols; ++c) {
            Site s;
            s.index = r * spec.cols + c;
            s.row = r;
            s.col = c;
            if (spec.kind == LatticeKind::square) {
                s.x = c * a;
                s.y = r * a;
            } else {
                s.x = c * a + (r % 2) * a / 2.0;
                s.y = r * dy;
            }
            lat.sites_.push_back(s);
        }
    }
    const int n = lat.size();
    lat.adj_.assign(n, {});
    const double tol = 1e-9;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j && std::abs(lat.dist2_in_a2(i, j) - 1.0) < tol)
                lat.adj_[i].push_back(j);
    return lat;
}

int Lattice::site_at(int row, int col) const {
    if (row < 0 || row >= spec_.rows || col < 0 || col >= spec_.cols)
        throw std::out_of_range("site coordinates out of range");
    return row * spec_.cols + col;
}

double Lattice::pair_distance(int i, int j) const {
    const Site& a = sites_.at(i);
    const Site& b = sites_.at(j);
    return std::hypot(a.x - b.x, a.y - b.y);
}

double Lattice::dist2_in_a2(int i, int j) const {
    const Site& a = sites_.at(i);
    const Site& b = sites_.at(j);
    const double dx = (a.x - b.x) / spec_.spacing;
    const double dy = (a.y - b.y) / spec_.spacing;
    return dx * dx + dy * dy;
}

std::pair<double, double> Lattice::center() const {
    double cx = 0, cy = 0;
    for (const Site& s : sites_) {
        cx += s.x;
        cy += s.y;
    }
    return {cx / size(), cy / size()};
}

int Lattice::edge_count() const {
    int e = 0;
    for (const auto& nb : adj_) e += static_cast<int>(nb.size());
    return e / 2;
}

namespace {

// Backtracking search for all permutations preserving every pairwise squared
// distance (absolute tolerance 1e-9 a^2; exact integers on the square lattice
// stay exact within that tolerance).
void extend_automorphism(const Lattice& lat, std::vector<int>& img,
                         std::vector<bool>& used, int k,
                         std::vector<std::vector<int>>& out) {
    const int n = lat.size();
    if (k == n) {
        out.push_back(img);
        return;
    }
    for (int cand = 0; cand < n; ++cand) {
        if (used[cand]) continue;
        bool ok = true;
        for (int p = 0; p < k && ok; ++p)
            if (std::abs(lat.dist2_in_a2(p, k) - lat.dist2_in_a2(img[p], cand)) > 1e-9)
                ok = false;
        if (!ok) continue;
        img[k] = cand;
        used[cand] = true;
        extend_automorphism(lat, img, used, k + 1, out);
        used[cand] = false;
    }
}

} // namespace

std::vector<std::vector<int>> symmetry_group(const Lattice& lat) {
    std::vector<std::vector<int>> out;
    std::vector<int> img(lat.size(), -1);
    std::vector<bool> used(lat.size(), false);
    extend_automorphism(lat, img, used, 0, out);
    return out;
}

std::vector<int> unique_sites_under_symmetry(const Lattice& lat) {
    const auto group = symmetry_group(lat);
    const int n = lat.size();
    std::vector<bool> seen(n, false);
    std::vector<int> reps;
    for (int i = 0; i < n; ++i) {
        if (seen[i]) continue;
        reps.push_back(i);
        for (const auto& g : group) seen[g[i]] = true;
    }
    return reps;
}

namespace {

// Standard d->(x,y) Hilbert construction.
std::pair<int, int> hilbert_d2xy(int order, int d) {
    int x = 0, y = 0, t = d;
    for (int s = 1; s < order; s *= 2) {
        int rx = 1 & (t / 2);
        int ry = 1 & (t ^ rx);
        if (ry == 0) {
            if (rx == 1) {
                x = s - 1 - x;
                y = s - 1 - y;
            }
            std::swap(x, y);
        }
        x += s * rx;
        y += s * ry;
        t /= 4;
    }
    return {x, y};
}

} // namespace

std::vector<int> hilbert_order(int L) {
    if (L < 1 || (L & (L - 1)) != 0)
        throw UnsupportedOrderError("hilbert_order requires a power-of-two side, got " +
                                    std::to_string(L));
    std::vector<int> order;
    order.reserve(L * L);
    for (int d = 0; d < L * L; ++d) {
        auto [x, y] = hilbert_d2xy(L, d);
        order.push_back(y * L + x); // row-major site index
    }
    return order;
}

} // namespace rydtwin
