#pragma once
#include <string>
#include <utility>
#include <vector>

namespace rydtwin {

enum class LatticeKind { square, hexagonal };

std::string to_string(LatticeKind k);
LatticeKind lattice_kind_from_string(const std::string& s);

struct LatticeSpec {
    LatticeKind kind = LatticeKind::square;
    int rows = 0;
    int cols = 0;           // 0 means "same as rows"
    double spacing = 3.0;   // a, in um
};

struct Site {
    int index;
    int row, col;
    double x, y;            // um
};

class Lattice {
  public:
    static Lattice build(const LatticeSpec& spec);

    const LatticeSpec& spec() const { return spec_; }
    int size() const { return static_cast<int>(sites_.size()); }
    const std::vector<Site>& sites() const { return sites_; }
    const Site& site(int i) const { return sites_.at(i); }
    int site_at(int row, int col) const;
    const std::vector<int>& neighbors(int i) const { return adj_.at(i); }

    double pair_distance(int i, int j) const;   // um
    double dist2_in_a2(int i, int j) const;     // squared distance in units of a^2
    std::pair<double, double> center() const;   // um
    int edge_count() const;

  private:
    LatticeSpec spec_;
    std::vector<Site> sites_;
    std::vector<std::vector<int>> adj_;
};

// All distance-preserving site permutations (closed under composition, contains identity).
std::vector<std::vector<int>> symmetry_group(const Lattice& lat);

// One representative (minimal index) per orbit of the symmetry group.
std::vector<int> unique_sites_under_symmetry(const Lattice& lat);

// Hilbert-curve visiting order for an L x L square lattice, L a power of two.
// Throws UnsupportedOrderError otherwise.
std::vector<int> hilbert_order(int L);

} // namespace rydtwin
