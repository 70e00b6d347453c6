#pragma once

// Vertex coloring of conflict graphs: DSatur, first-fit conflict repair, and
// assembly of the user-delivery array Q from a proper coloring.

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "conflict_graph.hpp"
#include "pda.hpp"

namespace macc {

/// Positive color per vertex id. Labels need not be contiguous; compacted()
/// relabels them onto [1, S] preserving their relative order.
class VertexColoring {
public:
    VertexColoring() = default;
    explicit VertexColoring(std::vector<int> colors) : colors_(std::move(colors)) {
        for (int c : colors_)
            if (c <= 0) throw std::invalid_argument("VertexColoring: colors must be positive");
    }

    std::size_t size() const { return colors_.size(); }
    int operator[](int v) const { return colors_.at(v); }
    const std::vector<int>& colors() const { return colors_; }

    /// S, the number of distinct colors.
    int used_colors() const { return static_cast<int>(std::set<int>(colors_.begin(), colors_.end()).size()); }
    int max_color() const { return colors_.empty() ? 0 : *std::max_element(colors_.begin(), colors_.end()); }
    bool is_compact() const { return max_color() == used_colors(); }

    VertexColoring compacted() const {
        std::set<int> distinct(colors_.begin(), colors_.end());
        std::map<int, int> label;
        int next = 1;
        for (int c : distinct) label[c] = next++;
        std::vector<int> out(colors_.size());
        for (std::size_t v = 0; v < colors_.size(); ++v) out[v] = label[colors_[v]];
        return VertexColoring(std::move(out));
    }

    /// Vertex ids grouped by color, in increasing color order.
    std::vector<std::vector<int>> classes() const {
        std::map<int, std::vector<int>> by_color;
        for (std::size_t v = 0; v < colors_.size(); ++v) by_color[colors_[v]].push_back(static_cast<int>(v));
        std::vector<std::vector<int>> out;
        for (auto& [c, vs] : by_color) out.push_back(std::move(vs));
        return out;
    }

    friend bool operator==(const VertexColoring&, const VertexColoring&) = default;

private:
    std::vector<int> colors_;
};

struct ColoringStats {
    std::uint64_t selections = 0;  // vertices chosen for (re)coloring
    std::uint64_t operations = 0;  // candidate scans plus saturation updates
};

// ---------------------------------------------------------------------------

/// DSatur. Picks the uncolored vertex of maximum saturation degree, then
/// maximum degree, then smallest id; assigns the smallest color absent from
/// its neighbors.
inline VertexColoring dsatur(const ConflictGraph& g, ColoringStats* stats = nullptr) {
    const int n = g.num_vertices();
    std::vector<int> color(n, 0);
    std::vector<int> saturation(n, 0);
    std::vector<boost::dynamic_bitset<std::uint64_t>> seen(n);  // colors present around each vertex
    ColoringStats local;

    for (int step = 0; step < n; ++step) {
        int pick = -1;
        for (int v = 0; v < n; ++v) {
            if (color[v]) continue;
            ++local.operations;
            if (pick < 0 || saturation[v] > saturation[pick] ||
                (saturation[v] == saturation[pick] && g.degree(v) > g.degree(pick)))
                pick = v;
        }
        ++local.selections;

        const auto& around = seen[pick];
        int c = 1;
        while (c < static_cast<int>(around.size()) && around.test(c)) ++c;
        color[pick] = c;

        for (int w : g.neighbors(pick)) {
            if (color[w]) continue;
            auto& bits = seen[w];
            if (static_cast<int>(bits.size()) <= c) bits.resize(c + 1);
            if (!bits.test(c)) {
                bits.set(c);
                ++saturation[w];
            }
            ++local.operations;
        }
    }
    if (stats) *stats = local;
    return VertexColoring(std::move(color));
}

struct ColoringCheck {
    bool proper = true;
    std::vector<Edge> conflicts;        // edges whose endpoints share a color
    std::vector<int> conflict_vertices;  // sorted endpoints of those edges
};

inline ColoringCheck validate_coloring(const ConflictGraph& g, const VertexColoring& c) {
    if (static_cast<int>(c.size()) != g.num_vertices())
        throw std::invalid_argument("validate_coloring: coloring has " + std::to_string(c.size()) +
                                    " entries for " + std::to_string(g.num_vertices()) + " vertices");
    ColoringCheck out;
    std::set<int> vs;
    for (auto [a, b] : g.edges()) {
        if (c[a] == c[b]) {
            out.conflicts.emplace_back(a, b);
            vs.insert(a);
            vs.insert(b);
        }
    }
    out.proper = out.conflicts.empty();
    out.conflict_vertices.assign(vs.begin(), vs.end());
    return out;
}

/// First-fit conflict repair. Conflict vertices are visited in decreasing
/// saturation degree (recomputed against the current assignment before each
/// pick, ties to the smallest id). A visited vertex that still clashes with a
/// neighbor takes the smallest used color absent from its neighbors, or a new
/// color max+1 when every used color is blocked. A proper input is returned
/// unchanged; otherwise the result is compacted.
inline VertexColoring repair(const ConflictGraph& g, const VertexColoring& initial, ColoringStats* stats = nullptr) {
    const ColoringCheck check = validate_coloring(g, initial);
    ColoringStats local;
    if (check.proper) {
        if (stats) *stats = local;
        return initial;
    }

    std::vector<int> color = initial.colors();
    std::set<int> used(color.begin(), color.end());
    std::vector<int> pending = check.conflict_vertices;

    auto neighbor_colors = [&](int v) {
        std::set<int> out;
        for (int w : g.neighbors(v)) out.insert(color[w]);
        return out;
    };
    auto clashes = [&](int v) {
        for (int w : g.neighbors(v))
            if (color[w] == color[v]) return true;
        return false;
    };

    while (!pending.empty()) {
        std::size_t best = 0;
        std::size_t best_sd = 0;
        for (std::size_t i = 0; i < pending.size(); ++i) {
            const std::size_t sd = neighbor_colors(pending[i]).size();
            ++local.operations;
            // pending is sorted by id, so strict > keeps the smallest id on ties
            if (i == 0 || sd > best_sd) {
                best = i;
                best_sd = sd;
            }
        }
        const int v = pending[best];
        pending.erase(pending.begin() + static_cast<std::ptrdiff_t>(best));
        ++local.selections;
        if (!clashes(v)) continue;

        const std::set<int> blocked = neighbor_colors(v);
        int chosen = 0;
        for (int c : used)
            if (!blocked.contains(c)) {
                chosen = c;
                break;
            }
        if (!chosen) {
            chosen = *used.rbegin() + 1;
            used.insert(chosen);
        }
        color[v] = chosen;
    }

    VertexColoring repaired(std::move(color));
    if (!validate_coloring(g, repaired).proper) throw std::logic_error("repair: conflicts remain after first-fit pass");
    if (stats) *stats = local;
    return repaired.compacted();
}

// ---------------------------------------------------------------------------

/// Q: copies the stars of u and writes each vertex's color at its cell
/// (after compaction onto [1, S]).
inline PdaArray assemble_q(const StarGrid& u, const ConflictGraph& g, const VertexColoring& c) {
    std::size_t nulls = 0;
    for (int f = 0; f < u.rows(); ++f)
        for (int k = 0; k < u.cols(); ++k)
            if (!u.is_star(f, k)) {
                if (nulls >= g.vertices().size() || !(g.cell(static_cast<int>(nulls)) == CellRef{f, k}))
                    throw std::invalid_argument("assemble_q: graph was not built from this retrieve array");
                ++nulls;
            }
    if (nulls != g.vertices().size())
        throw std::invalid_argument("assemble_q: graph was not built from this retrieve array");
    if (!validate_coloring(g, c).proper) throw std::invalid_argument("assemble_q: coloring is not proper");

    // codes must cover [1, S] for C2
    const VertexColoring labels = c.compacted();
    PdaArray q(u.rows(), u.cols());
    for (int v = 0; v < g.num_vertices(); ++v) q.set(g.cell(v).f, g.cell(v).k, Cell::code(labels[v]));
    return q;
}

inline PdaArray assemble_q(const StarGrid& u, const VertexColoring& c) {
    return assemble_q(u, build_conflict_graph(u), c);
}

// ---------------------------------------------------------------------------
// Coloring interchange document

struct ColoringDocument {
    VertexColoring coloring;
    std::string source;
};

inline nlohmann::json export_coloring(const VertexColoring& c, const std::string& source) {
    return {{"schema", kSchemaVersion}, {"colors", c.colors()}, {"num_colors", c.used_colors()}, {"source", source}};
}

inline ColoringDocument import_coloring(const nlohmann::json& doc) {
    using detail::require;
    detail::require_schema(doc, "coloring");
    require(doc.contains("colors") && doc["colors"].is_array(), "coloring: missing colors");
    require(doc.contains("num_colors") && doc["num_colors"].is_number_integer(), "coloring: missing num_colors");
    require(doc.contains("source") && doc["source"].is_string(), "coloring: missing source");
    std::vector<int> colors;
    for (const auto& c : doc["colors"]) {
        require(c.is_number_integer() && c.get<long long>() >= 1, "coloring: colors must be positive integers");
        colors.push_back(c.get<int>());
    }
    VertexColoring coloring(std::move(colors));
    require(doc["num_colors"].get<int>() == coloring.used_colors(),
            "coloring: num_colors " + doc["num_colors"].dump() + " but " + std::to_string(coloring.used_colors()) +
                " distinct colors present");
    return {std::move(coloring), doc["source"].get<std::string>()};
}

inline ColoringDocument import_coloring(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument(std::string("coloring: parse error: ") + e.what());
    }
    return import_coloring(doc);
}

}  // namespace macc
