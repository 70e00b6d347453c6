#pragma once

// Conflict graph over the null cells of a user-retrieve array. Two null cells
// are adjacent exactly when they could not carry the same multicast code, i.e.
// they share a row or column, or one of their crossing cells is not a star.

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "macc_model.hpp"
#include "pda.hpp"

namespace macc {

using Edge = std::pair<int, int>;

class ConflictGraph {
public:
    ConflictGraph() = default;

    /// Builds from an explicit vertex list and edge list. Edges are unordered;
    /// throws on self-loops, dangling ids or duplicates.
    ConflictGraph(std::vector<CellRef> vertices, const std::vector<Edge>& edges) : vertices_(std::move(vertices)) {
        const int n = num_vertices();
        neighbors_.assign(n, {});
        adjacency_.assign(n, boost::dynamic_bitset<std::uint64_t>(static_cast<std::size_t>(n)));
        edges_.reserve(edges.size());
        for (auto [a, b] : edges) {
            if (a < 0 || b < 0 || a >= n || b >= n) throw std::invalid_argument("ConflictGraph: dangling edge id");
            if (a == b) throw std::invalid_argument("ConflictGraph: self-loop on vertex " + std::to_string(a));
            if (a > b) std::swap(a, b);
            if (adjacency_[a].test(b))
                throw std::invalid_argument("ConflictGraph: duplicate edge " + std::to_string(a) + "-" + std::to_string(b));
            adjacency_[a].set(b);
            adjacency_[b].set(a);
            edges_.emplace_back(a, b);
        }
        std::sort(edges_.begin(), edges_.end());
        for (auto [a, b] : edges_) {
            neighbors_[a].push_back(b);
            neighbors_[b].push_back(a);
        }
        for (auto& nb : neighbors_) std::sort(nb.begin(), nb.end());
    }

    int num_vertices() const { return static_cast<int>(vertices_.size()); }
    std::size_t num_edges() const { return edges_.size(); }

    const std::vector<CellRef>& vertices() const { return vertices_; }
    CellRef cell(int v) const { return vertices_.at(v); }
    /// Sorted (min, max) pairs in lexicographic order.
    const std::vector<Edge>& edges() const { return edges_; }
    const std::vector<int>& neighbors(int v) const { return neighbors_.at(v); }
    int degree(int v) const { return static_cast<int>(neighbors_.at(v).size()); }
    bool adjacent(int u, int v) const { return adjacency_.at(u).test(v); }
    const boost::dynamic_bitset<std::uint64_t>& adjacency_row(int v) const { return adjacency_.at(v); }

    int max_degree() const {
        int d = 0;
        for (const auto& nb : neighbors_) d = std::max(d, static_cast<int>(nb.size()));
        return d;
    }

    friend bool operator==(const ConflictGraph& a, const ConflictGraph& b) {
        return a.vertices_ == b.vertices_ && a.edges_ == b.edges_;
    }

private:
    std::vector<CellRef> vertices_;
    std::vector<Edge> edges_;
    std::vector<std::vector<int>> neighbors_;
    std::vector<boost::dynamic_bitset<std::uint64_t>> adjacency_;
};

/// True iff null cells a and b of u could share a code without breaking C3.
inline bool can_share_code(const StarGrid& u, CellRef a, CellRef b) {
    return a.f != b.f && a.k != b.k && u.is_star(a.f, b.k) && u.is_star(b.f, a.k);
}

inline ConflictGraph build_conflict_graph(const StarGrid& u) {
    std::vector<CellRef> vertices;
    for (int f = 0; f < u.rows(); ++f)
        for (int k = 0; k < u.cols(); ++k)
            if (!u.is_star(f, k)) vertices.push_back({f, k});
    std::vector<Edge> edges;
    const int n = static_cast<int>(vertices.size());
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (!can_share_code(u, vertices[i], vertices[j])) edges.emplace_back(i, j);
    return ConflictGraph(std::move(vertices), edges);
}

inline ConflictGraph build_conflict_graph(const RetrieveArray& u) { return build_conflict_graph(u.grid); }

// ---------------------------------------------------------------------------
// Interchange documents

inline constexpr int kSchemaVersion = 1;

struct GraphMeta {
    int users = 0;        // K
    int cache_nodes = 0;  // Lambda
    int t = 0;
    std::uint64_t packets = 0;  // F
    std::uint64_t seed = 0;
    std::vector<std::vector<int>> topology;  // 0-based access sets

    friend bool operator==(const GraphMeta&, const GraphMeta&) = default;
};

struct GraphBundle {
    ConflictGraph graph;
    GraphMeta meta;

    friend bool operator==(const GraphBundle&, const GraphBundle&) = default;
};

inline GraphBundle make_bundle(const RetrieveArray& u, std::uint64_t seed) {
    const auto& topo = u.topology;
    return {build_conflict_graph(u),
            {topo.users(), topo.cache_nodes(), u.t, static_cast<std::uint64_t>(u.packets()), seed, topo.access_sets()}};
}

inline void check_bundle(const GraphBundle& b) {
    if (b.meta.users <= 0 || b.meta.packets == 0) throw std::invalid_argument("graph bundle: K and F must be positive");
    if (!b.meta.topology.empty() && static_cast<int>(b.meta.topology.size()) != b.meta.users)
        throw std::invalid_argument("graph bundle: topology has " + std::to_string(b.meta.topology.size()) +
                                    " users, meta.K is " + std::to_string(b.meta.users));
    const auto& vs = b.graph.vertices();
    for (std::size_t i = 0; i < vs.size(); ++i) {
        if (vs[i].f < 0 || static_cast<std::uint64_t>(vs[i].f) >= b.meta.packets || vs[i].k < 0 ||
            vs[i].k >= b.meta.users)
            throw std::invalid_argument("graph bundle: vertex " + std::to_string(i) + " outside the F x K grid");
        if (i > 0 && std::pair(vs[i - 1].f, vs[i - 1].k) >= std::pair(vs[i].f, vs[i].k))
            throw std::invalid_argument("graph bundle: vertices not in row-major order");
    }
}

inline nlohmann::json export_graph(const GraphBundle& b) {
    check_bundle(b);
    nlohmann::json topo = nlohmann::json::array();
    for (const auto& s : b.meta.topology) {
        nlohmann::json row = nlohmann::json::array();
        for (int node : s) row.push_back(node + 1);
        topo.push_back(std::move(row));
    }
    nlohmann::json vertices = nlohmann::json::array();
    for (int v = 0; v < b.graph.num_vertices(); ++v) {
        const CellRef c = b.graph.cell(v);
        vertices.push_back({{"id", v}, {"f", c.f + 1}, {"k", c.k + 1}, {"degree", b.graph.degree(v)}});
    }
    nlohmann::json edges = nlohmann::json::array();
    for (auto [a, c] : b.graph.edges()) edges.push_back({a, c});
    return {{"schema", kSchemaVersion},
            {"meta",
             {{"K", b.meta.users},
              {"Lambda", b.meta.cache_nodes},
              {"t", b.meta.t},
              {"F", b.meta.packets},
              {"seed", b.meta.seed},
              {"topology", std::move(topo)}}},
            {"num_vertices", b.graph.num_vertices()},
            {"vertices", std::move(vertices)},
            {"edges", std::move(edges)}};
}

namespace detail {

inline void require(bool cond, const std::string& what) {
    if (!cond) throw std::invalid_argument(what);
}

inline void require_schema(const nlohmann::json& doc, const char* kind) {
    require(doc.is_object(), std::string(kind) + ": document is not an object");
    require(doc.contains("schema") && doc["schema"].is_number_integer(), std::string(kind) + ": missing schema");
    require(doc["schema"].get<int>() == kSchemaVersion,
            std::string(kind) + ": unknown schema version " + doc["schema"].dump());
}

}  // namespace detail

inline GraphBundle import_graph(const nlohmann::json& doc) {
    using detail::require;
    detail::require_schema(doc, "graph");
    require(doc.contains("meta") && doc["meta"].is_object(), "graph: missing meta");
    require(doc.contains("vertices") && doc["vertices"].is_array(), "graph: missing vertices");
    require(doc.contains("edges") && doc["edges"].is_array(), "graph: missing edges");

    GraphBundle b;
    try {
        const auto& m = doc["meta"];
        b.meta.users = m.at("K").get<int>();
        b.meta.cache_nodes = m.at("Lambda").get<int>();
        b.meta.t = m.at("t").get<int>();
        b.meta.packets = m.at("F").get<std::uint64_t>();
        b.meta.seed = m.at("seed").get<std::uint64_t>();
        for (const auto& row : m.at("topology")) {
            std::vector<int> s;
            for (const auto& node : row) s.push_back(node.get<int>() - 1);
            b.meta.topology.push_back(std::move(s));
        }
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("graph: malformed meta: ") + e.what());
    }

    std::vector<CellRef> vertices;
    std::vector<int> degrees;
    const auto& vs = doc["vertices"];
    for (std::size_t i = 0; i < vs.size(); ++i) {
        try {
            require(vs[i].at("id").get<int>() == static_cast<int>(i), "graph: vertex ids must be 0..n-1 in order");
            vertices.push_back({vs[i].at("f").get<int>() - 1, vs[i].at("k").get<int>() - 1});
            degrees.push_back(vs[i].at("degree").get<int>());
        } catch (const nlohmann::json::exception& e) {
            throw std::invalid_argument(std::string("graph: malformed vertex: ") + e.what());
        }
    }
    if (doc.contains("num_vertices"))
        require(doc["num_vertices"].get<std::size_t>() == vertices.size(), "graph: num_vertices mismatch");

    std::vector<Edge> edges;
    for (const auto& e : doc["edges"]) {
        require(e.is_array() && e.size() == 2 && e[0].is_number_integer() && e[1].is_number_integer(),
                "graph: edge must be a pair of integers");
        edges.emplace_back(e[0].get<int>(), e[1].get<int>());
    }
    b.graph = ConflictGraph(std::move(vertices), edges);
    for (int v = 0; v < b.graph.num_vertices(); ++v)
        require(b.graph.degree(v) == degrees[v], "graph: degree of vertex " + std::to_string(v) + " disagrees with edges");
    check_bundle(b);
    return b;
}

inline GraphBundle import_graph(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument(std::string("graph: parse error: ") + e.what());
    }
    return import_graph(doc);
}

}  // namespace macc
