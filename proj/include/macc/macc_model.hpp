#pragma once

// Multi-access caching model: Lambda cache nodes filled with the MN t-subset
// placement, K cache-less users each reading an arbitrary subset of nodes.
//
// Indices are 0-based throughout the C++ API (packets f, users k, cache nodes
// lambda). The text formats are 1-based.

#include <algorithm>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/dynamic_bitset.hpp>
#include <boost/rational.hpp>

#include "combinatorics.hpp"
#include "random.hpp"

namespace macc {

using Rational = boost::rational<std::int64_t>;
using PacketSet = boost::dynamic_bitset<std::uint64_t>;

struct SystemConfig {
    int users = 0;        // K
    int cache_nodes = 0;  // Lambda
    int files = 0;        // N
    int t = 0;

    std::uint64_t subpacketization() const { return binomial(cache_nodes, t); }
    /// Per-node memory M = tN / Lambda, in files.
    Rational memory() const { return Rational(static_cast<std::int64_t>(t) * files, cache_nodes); }
    Rational memory_ratio() const { return Rational(t, cache_nodes); }

    void validate(bool distinct_demands = false) const {
        if (users <= 0 || cache_nodes <= 0) throw std::invalid_argument("SystemConfig: K and Lambda must be positive");
        if (t < 0 || t > cache_nodes) throw std::invalid_argument("SystemConfig: require 0 <= t <= Lambda");
        if (files <= 0) throw std::invalid_argument("SystemConfig: N must be positive");
        if (distinct_demands && files < users)
            throw std::invalid_argument("SystemConfig: converse evaluation needs N >= K");
    }

    friend bool operator==(const SystemConfig&, const SystemConfig&) = default;
};

// ---------------------------------------------------------------------------

class AccessTopology {
public:
    AccessTopology() = default;

    /// Each set is normalized (sorted, deduplicated). Throws unless every set is
    /// nonempty, within [0, Lambda), and every node is covered by some user.
    AccessTopology(int cache_nodes, std::vector<std::vector<int>> access_sets)
        : cache_nodes_(cache_nodes), sets_(std::move(access_sets)) {
        if (cache_nodes_ <= 0) throw std::invalid_argument("AccessTopology: Lambda must be positive");
        if (sets_.empty()) throw std::invalid_argument("AccessTopology: no users");
        std::vector<bool> covered(cache_nodes_, false);
        for (auto& s : sets_) {
            std::sort(s.begin(), s.end());
            s.erase(std::unique(s.begin(), s.end()), s.end());
            if (s.empty()) throw std::invalid_argument("AccessTopology: empty access set");
            for (int node : s) {
                if (node < 0 || node >= cache_nodes_) throw std::invalid_argument("AccessTopology: node out of range");
                covered[node] = true;
            }
        }
        if (std::find(covered.begin(), covered.end(), false) != covered.end())
            throw std::invalid_argument("AccessTopology: some cache node is not accessed by any user");
    }

    int users() const { return static_cast<int>(sets_.size()); }
    int cache_nodes() const { return cache_nodes_; }
    const std::vector<int>& access_set(int k) const { return sets_.at(k); }
    const std::vector<std::vector<int>>& access_sets() const { return sets_; }

    bool accesses(int k, int node) const {
        const auto& s = sets_.at(k);
        return std::binary_search(s.begin(), s.end(), node);
    }

    friend bool operator==(const AccessTopology&, const AccessTopology&) = default;

private:
    int cache_nodes_ = 0;
    std::vector<std::vector<int>> sets_;
};

/// Bijection between packet index f and the t-subset T_f of cache nodes, in
/// lexicographic order.
class PacketIndex {
public:
    PacketIndex(int cache_nodes, int t) : cache_nodes_(cache_nodes), t_(t) {
        if (t < 0 || t > cache_nodes) throw std::invalid_argument("PacketIndex: require 0 <= t <= Lambda");
    }
    std::uint64_t size() const { return binomial(cache_nodes_, t_); }
    Subset unrank(std::uint64_t f) const { return lex_unrank(f, cache_nodes_, t_); }
    std::uint64_t rank(const Subset& nodes) const {
        if (static_cast<int>(nodes.size()) != t_) throw std::invalid_argument("PacketIndex: wrong subset size");
        return lex_rank(nodes, cache_nodes_);
    }

private:
    int cache_nodes_;
    int t_;
};

// ---------------------------------------------------------------------------

/// Dense star/null grid.
class StarGrid {
public:
    StarGrid() = default;
    StarGrid(int rows, int cols) : rows_(rows), cols_(cols), stars_(static_cast<std::size_t>(rows) * cols, 0) {}

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    bool is_star(int f, int k) const { return stars_[index(f, k)] != 0; }
    void set_star(int f, int k, bool star = true) { stars_[index(f, k)] = star ? 1 : 0; }

    int column_stars(int k) const {
        int n = 0;
        for (int f = 0; f < rows_; ++f) n += is_star(f, k);
        return n;
    }
    int row_stars(int f) const {
        int n = 0;
        for (int k = 0; k < cols_; ++k) n += is_star(f, k);
        return n;
    }
    std::size_t null_count() const {
        return stars_.size() - static_cast<std::size_t>(std::count(stars_.begin(), stars_.end(), 1));
    }

    friend bool operator==(const StarGrid&, const StarGrid&) = default;

private:
    std::size_t index(int f, int k) const {
        if (f < 0 || f >= rows_ || k < 0 || k >= cols_) throw std::out_of_range("StarGrid: cell out of range");
        return static_cast<std::size_t>(f) * cols_ + k;
    }

    int rows_ = 0;
    int cols_ = 0;
    std::vector<std::uint8_t> stars_;
};

/// F x Lambda node-placement array C: C(f, lambda) is a star iff lambda in T_f.
struct NodePlacement {
    int t = 0;
    StarGrid grid;

    int packets() const { return grid.rows(); }
    int cache_nodes() const { return grid.cols(); }
};

inline NodePlacement build_node_placement(int cache_nodes, int t) {
    if (cache_nodes <= 0) throw std::invalid_argument("build_node_placement: Lambda must be positive");
    if (t < 0 || t > cache_nodes) throw std::invalid_argument("build_node_placement: require 0 <= t <= Lambda");
    const auto subsets = lex_subsets(cache_nodes, t);
    NodePlacement p{t, StarGrid(static_cast<int>(subsets.size()), cache_nodes)};
    for (int f = 0; f < p.packets(); ++f)
        for (int node : subsets[f]) p.grid.set_star(f, node);
    return p;
}

/// F x K user-retrieve array U: U(f, k) is a star iff T_f meets A_k.
struct RetrieveArray {
    StarGrid grid;
    int t = 0;
    AccessTopology topology;

    int packets() const { return grid.rows(); }
    int users() const { return grid.cols(); }
    bool is_star(int f, int k) const { return grid.is_star(f, k); }
};

inline RetrieveArray derive_retrieve_array(const NodePlacement& placement, const AccessTopology& topology) {
    if (topology.cache_nodes() != placement.cache_nodes())
        throw std::invalid_argument("derive_retrieve_array: topology and placement disagree on Lambda");
    RetrieveArray u{StarGrid(placement.packets(), topology.users()), placement.t, topology};
    for (int k = 0; k < topology.users(); ++k)
        for (int f = 0; f < placement.packets(); ++f)
            for (int node : topology.access_set(k))
                if (placement.grid.is_star(f, node)) {
                    u.grid.set_star(f, k);
                    break;
                }
    return u;
}

inline RetrieveArray derive_retrieve_array(const AccessTopology& topology, int t) {
    return derive_retrieve_array(build_node_placement(topology.cache_nodes(), t), topology);
}

/// S_{d_k}: the null rows of column k, one bitset over [F] per user.
inline std::vector<PacketSet> uncached_sets(const StarGrid& u) {
    std::vector<PacketSet> out(u.cols(), PacketSet(static_cast<std::size_t>(u.rows())));
    for (int k = 0; k < u.cols(); ++k)
        for (int f = 0; f < u.rows(); ++f)
            if (!u.is_star(f, k)) out[k].set(f);
    return out;
}

inline std::vector<PacketSet> uncached_sets(const RetrieveArray& u) { return uncached_sets(u.grid); }

// ---------------------------------------------------------------------------
// Random topologies

struct DegreeRange {
    int lo = 1;
    int hi = 1;
};

/// Each user draws a degree uniformly from [lo, hi] and an access set
/// uniformly among subsets of that size; then every still-uncovered node, in
/// increasing order, joins the access set of a uniformly chosen user.
inline AccessTopology generate_topology(int users, int cache_nodes, DegreeRange degree, std::uint64_t seed) {
    if (users <= 0 || cache_nodes <= 0) throw std::invalid_argument("generate_topology: K and Lambda must be positive");
    if (degree.lo < 1 || degree.lo > degree.hi || degree.hi > cache_nodes)
        throw std::invalid_argument("generate_topology: require 1 <= lo <= hi <= Lambda");
    Rng rng(seed);
    std::vector<std::vector<int>> sets(users);
    std::vector<bool> covered(cache_nodes, false);
    for (auto& s : sets) {
        s = rng.subset(cache_nodes, rng.between(degree.lo, degree.hi));
        for (int node : s) covered[node] = true;
    }
    for (int node = 0; node < cache_nodes; ++node) {
        if (covered[node]) continue;
        auto& s = sets[rng.below(static_cast<std::uint64_t>(users))];
        s.insert(std::upper_bound(s.begin(), s.end(), node), node);
    }
    return AccessTopology(cache_nodes, std::move(sets));
}

// ---------------------------------------------------------------------------
// Topology text form: header "K Lambda t seed", then one line per user with
// space-separated 1-based cache indices.

struct TopologyFile {
    AccessTopology topology;
    int t = 0;
    std::uint64_t seed = 0;
};

inline void write_topology(std::ostream& os, const AccessTopology& topo, int t, std::uint64_t seed) {
    os << topo.users() << ' ' << topo.cache_nodes() << ' ' << t << ' ' << seed << '\n';
    for (const auto& s : topo.access_sets()) {
        for (std::size_t i = 0; i < s.size(); ++i) os << (i ? " " : "") << s[i] + 1;
        os << '\n';
    }
}

inline TopologyFile read_topology(std::istream& is) {
    std::string line;
    auto next_line = [&]() -> bool {
        while (std::getline(is, line)) {
            if (line.find_first_not_of(" \t\r") != std::string::npos && line[line.find_first_not_of(" \t\r")] != '#')
                return true;
        }
        return false;
    };
    if (!next_line()) throw std::invalid_argument("read_topology: missing header");
    std::istringstream header(line);
    int users = 0, cache_nodes = 0, t = 0;
    std::uint64_t seed = 0;
    if (!(header >> users >> cache_nodes >> t >> seed) || users <= 0)
        throw std::invalid_argument("read_topology: header must be 'K Lambda t seed'");
    std::vector<std::vector<int>> sets;
    for (int k = 0; k < users; ++k) {
        if (!next_line()) throw std::invalid_argument("read_topology: expected " + std::to_string(users) + " user lines");
        std::istringstream ls(line);
        std::vector<int> s;
        int node = 0;
        while (ls >> node) s.push_back(node - 1);
        if (!ls.eof()) throw std::invalid_argument("read_topology: bad cache index on user line " + std::to_string(k + 1));
        sets.push_back(std::move(s));
    }
    if (next_line()) throw std::invalid_argument("read_topology: trailing content after user lines");
    return {AccessTopology(cache_nodes, std::move(sets)), t, seed};
}

}  // namespace macc
