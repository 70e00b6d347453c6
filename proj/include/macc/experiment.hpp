#pragma once

// Batch pipeline: generate topology -> retrieve array -> conflict graph ->
// DSatur -> converse bounds -> decode simulation, with CSV metrics and the
// graph/coloring document exchange used by external colorers.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "coloring.hpp"
#include "conflict_graph.hpp"
#include "converse.hpp"
#include "delivery.hpp"
#include "macc_model.hpp"
#include "random.hpp"

namespace macc {

namespace fs = std::filesystem;

enum class Stage { graph, color, bound, simulate };

inline const char* to_string(Stage s) {
    switch (s) {
        case Stage::graph: return "graph";
        case Stage::color: return "color";
        case Stage::bound: return "bound";
        case Stage::simulate: return "simulate";
    }
    return "?";
}

enum class IcMethod { dp, enumerate, none };

/// "4,6,8..10" -> {4, 6, 8, 9, 10}
inline std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        try {
            const auto dots = item.find("..");
            if (dots == std::string::npos) {
                out.push_back(std::stoi(item));
            } else {
                const int lo = std::stoi(item.substr(0, dots));
                const int hi = std::stoi(item.substr(dots + 2));
                if (lo > hi) throw std::invalid_argument("empty range");
                for (int v = lo; v <= hi; ++v) out.push_back(v);
            }
        } catch (const std::exception&) {
            throw std::invalid_argument("bad integer list '" + text + "'");
        }
    }
    return out;
}

inline DegreeRange parse_degree(const std::string& text) {
    const auto colon = text.find(':');
    try {
        if (colon == std::string::npos) {
            const int d = std::stoi(text);
            return {d, d};
        }
        return {std::stoi(text.substr(0, colon)), std::stoi(text.substr(colon + 1))};
    } catch (const std::exception&) {
        throw std::invalid_argument("bad degree range '" + text + "', expected lo:hi");
    }
}

inline std::set<Stage> parse_stages(const std::string& text) {
    std::set<Stage> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty() || item == "none") continue;
        if (item == "all") return {Stage::graph, Stage::color, Stage::bound, Stage::simulate};
        if (item == "graph") out.insert(Stage::graph);
        else if (item == "color") out.insert(Stage::color);
        else if (item == "bound") out.insert(Stage::bound);
        else if (item == "simulate") out.insert(Stage::simulate);
        else throw std::invalid_argument("unknown stage '" + item + "'");
    }
    return out;
}

struct ExperimentSpec {
    std::vector<int> users{5};
    int cache_nodes = 4;
    std::vector<int> t_values{2};
    int count = 1;  // topologies per (K, t)
    DegreeRange degree{1, 1};
    std::uint64_t base_seed = 1;
    fs::path out_dir;  // empty: nothing written
    std::set<Stage> stages{Stage::graph, Stage::color, Stage::bound, Stage::simulate};
    int files = 0;  // N; 0 means N = K
    int packet_bits = FileLibrary::kDefaultPacketBits;
    IcMethod ic = IcMethod::dp;
    std::optional<fs::path> topology_file;

    void validate() const {
        if (count < 0) throw std::invalid_argument("experiment: count must be nonnegative");
        if (packet_bits <= 0) throw std::invalid_argument("experiment: packet bits must be positive");
        if (topology_file) return;
        if (users.empty() || t_values.empty()) throw std::invalid_argument("experiment: need at least one K and one t");
        if (cache_nodes <= 0) throw std::invalid_argument("experiment: Lambda must be positive");
        for (int k : users)
            if (k <= 0) throw std::invalid_argument("experiment: K must be positive");
        for (int t : t_values)
            if (t < 0 || t > cache_nodes) throw std::invalid_argument("experiment: require 0 <= t <= Lambda");
        if (degree.lo < 1 || degree.lo > degree.hi || degree.hi > cache_nodes)
            throw std::invalid_argument("experiment: degree range must satisfy 1 <= lo <= hi <= Lambda");
    }
};

struct Instance {
    int t = 0;
    std::uint64_t seed = 0;
    AccessTopology topology;

    std::string key() const {
        return "K" + std::to_string(topology.users()) + "_L" + std::to_string(topology.cache_nodes()) + "_t" +
               std::to_string(t) + "_s" + std::to_string(seed);
    }
};

/// Instances in (K, t, index) order; seed = base_seed + index, so every t of a
/// given K sees the same topologies.
inline std::vector<Instance> enumerate_instances(const ExperimentSpec& spec) {
    spec.validate();
    std::vector<Instance> out;
    if (spec.topology_file) {
        std::ifstream in(*spec.topology_file);
        if (!in) throw std::runtime_error("cannot open topology file " + spec.topology_file->string());
        TopologyFile tf = read_topology(in);
        for (int t : spec.t_values.empty() ? std::vector<int>{tf.t} : spec.t_values) {
            if (t < 0 || t > tf.topology.cache_nodes()) throw std::invalid_argument("experiment: require 0 <= t <= Lambda");
            out.push_back({t, tf.seed, tf.topology});
        }
        return out;
    }
    for (int k : spec.users)
        for (int t : spec.t_values)
            for (int i = 0; i < spec.count; ++i) {
                const std::uint64_t seed = spec.base_seed + static_cast<std::uint64_t>(i);
                out.push_back({t, seed, generate_topology(k, spec.cache_nodes, spec.degree, seed)});
            }
    return out;
}

// ---------------------------------------------------------------------------
// Metrics

struct MetricsRow {
    bool aggregate = false;
    int users = 0;
    int cache_nodes = 0;
    int t = 0;
    std::uint64_t seed = 0;
    std::uint64_t packets = 0;
    std::size_t instances = 1;  // aggregate rows: how many instances were averaged
    std::optional<std::size_t> vertices;
    std::optional<std::size_t> edges;
    std::optional<int> s_dsatur;
    std::optional<int> s_external;
    std::optional<Rational> r_dsatur;
    std::optional<Rational> r_greedy;
    std::optional<Rational> r_ic;
    std::optional<double> ratio_greedy_ic;
    std::optional<double> ratio_dsatur_ic;
    std::optional<double> ratio_external_dsatur;
    std::optional<std::uint64_t> dsatur_ops;
    std::optional<std::uint64_t> greedy_work;
    std::optional<std::uint64_t> ic_work;
    std::optional<bool> decode_ok;
    std::optional<bool> proper_before_repair;
    std::string error;
    // aggregate means of the load columns
    std::optional<double> mean_r_dsatur;
    std::optional<double> mean_r_greedy;
    std::optional<double> mean_r_ic;
};

inline constexpr const char* kMetricsHeader =
    "agg,K,Lambda,t,seed,F,instances,vertices,edges,S_dsatur,S_external,R_dsatur,R_greedy,R_ic,"
    "ratio_greedy_ic,ratio_dsatur_ic,ratio_external_dsatur,dsatur_ops,greedy_work,ic_work,decode_ok,"
    "proper_before_repair,error";

inline double to_double(const Rational& r) {
    return static_cast<double>(r.numerator()) / static_cast<double>(r.denominator());
}

/// a / b with 0 / 0 read as 1 (both loads vanish exactly when U is all stars).
inline double load_ratio(const Rational& a, const Rational& b) {
    // numerator tests: mixed rational/int comparisons recurse under C++20 in older Boost
    if (b.numerator() == 0) return a.numerator() == 0 ? 1.0 : std::numeric_limits<double>::infinity();
    return to_double(a / b);
}

namespace detail {

inline std::string fixed9(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9f", v);
    return buf;
}

template <class T>
std::string opt(const std::optional<T>& v) {
    if (!v) return "";
    if constexpr (std::is_same_v<T, Rational>) return format_rational(*v);
    else if constexpr (std::is_same_v<T, double>) return fixed9(*v);
    else if constexpr (std::is_same_v<T, bool>) return *v ? "1" : "0";
    else return std::to_string(*v);
}

inline std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c == '\n' ? ' ' : c;
    }
    return out + '"';
}

}  // namespace detail

inline std::string to_csv(const MetricsRow& r) {
    using detail::opt;
    std::ostringstream os;
    os << (r.aggregate ? 1 : 0) << ',' << r.users << ',' << r.cache_nodes << ',' << r.t << ','
       << (r.aggregate ? "" : std::to_string(r.seed)) << ',' << r.packets << ',' << r.instances << ','
       << opt(r.vertices) << ',' << opt(r.edges) << ',' << opt(r.s_dsatur) << ',' << opt(r.s_external) << ',';
    if (r.aggregate)
        os << opt(r.mean_r_dsatur) << ',' << opt(r.mean_r_greedy) << ',' << opt(r.mean_r_ic) << ',';
    else
        os << opt(r.r_dsatur) << ',' << opt(r.r_greedy) << ',' << opt(r.r_ic) << ',';
    os << opt(r.ratio_greedy_ic) << ',' << opt(r.ratio_dsatur_ic) << ',' << opt(r.ratio_external_dsatur) << ','
       << opt(r.dsatur_ops) << ',' << opt(r.greedy_work) << ',' << opt(r.ic_work) << ',' << opt(r.decode_ok) << ','
       << opt(r.proper_before_repair) << ',' << detail::csv_escape(r.error);
    return os.str();
}

inline void write_metrics(std::ostream& os, const std::vector<MetricsRow>& rows) {
    os << kMetricsHeader << '\n';
    for (const auto& r : rows) os << to_csv(r) << '\n';
}

/// One agg=1 row per (K, Lambda, t) holding the mean of every numeric field
/// present in all of that group's error-free instance rows.
inline std::vector<MetricsRow> aggregate_rows(const std::vector<MetricsRow>& rows) {
    std::map<std::tuple<int, int, int>, std::vector<const MetricsRow*>> groups;
    std::vector<std::tuple<int, int, int>> order;
    for (const auto& r : rows) {
        if (r.aggregate || !r.error.empty()) continue;
        const auto key = std::make_tuple(r.users, r.cache_nodes, r.t);
        if (!groups.contains(key)) order.push_back(key);
        groups[key].push_back(&r);
    }
    auto mean = [](const std::vector<const MetricsRow*>& g, auto field) -> std::optional<double> {
        double sum = 0;
        for (const MetricsRow* r : g) {
            const auto v = field(*r);
            if (!v) return std::nullopt;
            sum += *v;
        }
        return sum / static_cast<double>(g.size());
    };
    auto as_double = [](const std::optional<Rational>& r) -> std::optional<double> {
        if (!r) return std::nullopt;
        return to_double(*r);
    };

    std::vector<MetricsRow> out;
    for (const auto& key : order) {
        const auto& g = groups[key];
        MetricsRow a;
        a.aggregate = true;
        std::tie(a.users, a.cache_nodes, a.t) = key;
        a.packets = g.front()->packets;
        a.instances = g.size();
        a.mean_r_dsatur = mean(g, [&](const MetricsRow& r) { return as_double(r.r_dsatur); });
        a.mean_r_greedy = mean(g, [&](const MetricsRow& r) { return as_double(r.r_greedy); });
        a.mean_r_ic = mean(g, [&](const MetricsRow& r) { return as_double(r.r_ic); });
        a.ratio_greedy_ic = mean(g, [](const MetricsRow& r) { return r.ratio_greedy_ic; });
        a.ratio_dsatur_ic = mean(g, [](const MetricsRow& r) { return r.ratio_dsatur_ic; });
        a.ratio_external_dsatur = mean(g, [](const MetricsRow& r) { return r.ratio_external_dsatur; });
        out.push_back(std::move(a));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Pipeline

namespace detail {

inline void write_file(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path());
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << content;
        if (!out) throw std::runtime_error("write failed for " + tmp.string());
    }
    fs::rename(tmp, path);
}

inline std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace detail

struct InstanceResult {
    MetricsRow row;
    std::optional<GraphBundle> bundle;
    std::optional<VertexColoring> coloring;
};

inline InstanceResult run_instance(const ExperimentSpec& spec, const Instance& inst) {
    InstanceResult res;
    MetricsRow& row = res.row;
    row.users = inst.topology.users();
    row.cache_nodes = inst.topology.cache_nodes();
    row.t = inst.t;
    row.seed = inst.seed;
    try {
        const RetrieveArray u = derive_retrieve_array(inst.topology, inst.t);
        row.packets = static_cast<std::uint64_t>(u.packets());
        const bool want_graph = spec.stages.contains(Stage::graph) || spec.stages.contains(Stage::color) ||
                                spec.stages.contains(Stage::simulate);
        if (want_graph) {
            res.bundle = make_bundle(u, inst.seed);
            row.vertices = static_cast<std::size_t>(res.bundle->graph.num_vertices());
            row.edges = res.bundle->graph.num_edges();
        }
        std::optional<PdaArray> q;
        if (spec.stages.contains(Stage::color) || spec.stages.contains(Stage::simulate)) {
            ColoringStats stats;
            res.coloring = dsatur(res.bundle->graph, &stats);
            q = assemble_q(u.grid, res.bundle->graph, *res.coloring);
            if (!validate_pda(*q, ValidationMode::delivery_only).ok)
                throw std::logic_error("assembled Q fails delivery validation");
            row.s_dsatur = res.coloring->used_colors();
            row.r_dsatur = load(*row.s_dsatur, u.packets());
            row.dsatur_ops = stats.operations;
        }
        if (spec.stages.contains(Stage::bound)) {
            SystemConfig{row.users, row.cache_nodes, spec.files ? spec.files : row.users, inst.t}.validate(true);
            const auto family = DemandSetFamily::from(u);
            const ConverseReport greedy = greedy_converse(family);
            row.r_greedy = greedy.bound;
            row.greedy_work = greedy.work;
            if (spec.ic != IcMethod::none) {
                const ConverseReport ic =
                    spec.ic == IcMethod::enumerate ? ic_converse_enum(family) : ic_converse_dp(family);
                row.r_ic = ic.bound;
                row.ic_work = ic.work;
                row.ratio_greedy_ic = load_ratio(greedy.bound, ic.bound);
                if (row.r_dsatur) row.ratio_dsatur_ic = load_ratio(*row.r_dsatur, ic.bound);
            }
        }
        if (spec.stages.contains(Stage::simulate)) {
            const int files = spec.files ? spec.files : row.users;
            Rng stream(inst.seed);
            const FileLibrary lib(files, u.packets(), spec.packet_bits, stream.next());
            const DemandVector d = random_demands(row.users, files, stream);
            const auto schedule = make_schedule(*q, d, lib);
            row.decode_ok = decode_all(schedule, u.grid, *q, d, lib).ok;
        }
    } catch (const std::exception& e) {
        row.error = e.what();
    }
    return res;
}

struct BatchResult {
    std::vector<MetricsRow> rows;  // instance rows followed by aggregate rows
    std::size_t failures = 0;
};

inline std::string describe(const ExperimentSpec& spec) {
    std::ostringstream os;
    auto list = [](const std::vector<int>& v) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
        return s;
    };
    os << "rng=" << Rng::kAlgorithm << '\n'
       << "users=" << list(spec.users) << '\n'
       << "caches=" << spec.cache_nodes << '\n'
       << "t=" << list(spec.t_values) << '\n'
       << "count=" << spec.count << '\n'
       << "degree=" << spec.degree.lo << ':' << spec.degree.hi << '\n'
       << "seed=" << spec.base_seed << '\n'
       << "files=" << spec.files << '\n'
       << "packet-bits=" << spec.packet_bits << '\n'
       << "ic=" << (spec.ic == IcMethod::dp ? "dp" : spec.ic == IcMethod::enumerate ? "enum" : "none") << '\n';
    os << "stages=";
    bool first = true;
    for (Stage s : spec.stages) {
        os << (first ? "" : ",") << to_string(s);
        first = false;
    }
    os << '\n';
    if (spec.topology_file) os << "topology=" << spec.topology_file->string() << '\n';
    return os.str();
}

/// Runs every instance; failures are recorded in the row's error column. With
/// an output directory, writes config.txt, metrics.csv and (graph stage)
/// graphs/<key>.json.
inline BatchResult run_batch(const ExperimentSpec& spec) {
    BatchResult result;
    if (!spec.out_dir.empty()) detail::write_file(spec.out_dir / "config.txt", describe(spec));
    if (spec.stages.empty()) {
        if (!spec.out_dir.empty()) detail::write_file(spec.out_dir / "metrics.csv", std::string(kMetricsHeader) + "\n");
        return result;
    }
    for (const Instance& inst : enumerate_instances(spec)) {
        InstanceResult r = run_instance(spec, inst);
        if (!r.row.error.empty()) ++result.failures;
        if (!spec.out_dir.empty() && r.bundle && spec.stages.contains(Stage::graph))
            detail::write_file(spec.out_dir / "graphs" / (inst.key() + ".json"), export_graph(*r.bundle).dump() + "\n");
        result.rows.push_back(std::move(r.row));
    }
    for (auto& a : aggregate_rows(result.rows)) result.rows.push_back(std::move(a));
    if (!spec.out_dir.empty()) {
        std::ostringstream os;
        write_metrics(os, result.rows);
        detail::write_file(spec.out_dir / "metrics.csv", os.str());
    }
    return result;
}

// ---------------------------------------------------------------------------
// Dataset exchange

struct DatasetSummary {
    std::size_t graphs = 0;
    std::size_t vertices = 0;
    double degree_mean = 0;
    double degree_variance = 0;  // population variance
};

inline std::size_t dataset_size(const ExperimentSpec& spec) {
    return spec.users.size() * spec.t_values.size() * static_cast<std::size_t>(spec.count);
}

/// graphs/<key>.json, labels/<key>.json (DSatur coloring) and stats.json with
/// the dataset-wide vertex degree mean and variance.
inline DatasetSummary export_dataset(const ExperimentSpec& spec) {
    if (spec.out_dir.empty()) throw std::invalid_argument("export_dataset: output directory required");
    std::error_code ec;
    fs::create_directories(spec.out_dir, ec);
    if (ec || !fs::is_directory(spec.out_dir))
        throw std::runtime_error("export_dataset: cannot create " + spec.out_dir.string());

    DatasetSummary summary;
    double sum = 0;
    double sum_sq = 0;
    for (const Instance& inst : enumerate_instances(spec)) {
        const RetrieveArray u = derive_retrieve_array(inst.topology, inst.t);
        const GraphBundle bundle = make_bundle(u, inst.seed);
        const VertexColoring labels = dsatur(bundle.graph);
        detail::write_file(spec.out_dir / "graphs" / (inst.key() + ".json"), export_graph(bundle).dump() + "\n");
        detail::write_file(spec.out_dir / "labels" / (inst.key() + ".json"),
                           export_coloring(labels, "dsatur").dump() + "\n");
        for (int v = 0; v < bundle.graph.num_vertices(); ++v) {
            const double d = bundle.graph.degree(v);
            sum += d;
            sum_sq += d * d;
        }
        summary.vertices += static_cast<std::size_t>(bundle.graph.num_vertices());
        ++summary.graphs;
    }
    if (summary.vertices) {
        const double n = static_cast<double>(summary.vertices);
        summary.degree_mean = sum / n;
        summary.degree_variance = std::max(0.0, sum_sq / n - summary.degree_mean * summary.degree_mean);
    }
    const nlohmann::json stats = {{"schema", kSchemaVersion},
                                  {"num_graphs", summary.graphs},
                                  {"num_vertices", summary.vertices},
                                  {"degree_mean", summary.degree_mean},
                                  {"degree_variance", summary.degree_variance}};
    detail::write_file(spec.out_dir / "stats.json", stats.dump() + "\n");
    return summary;
}

struct ScoreResult {
    std::vector<MetricsRow> rows;
    std::vector<std::string> unmatched;                         // keys present on one side only
    std::vector<std::pair<std::string, std::string>> rejected;  // key, reason
};

/// Pairs <key>.json in the coloring directory with <key>.json in the graph
/// directory. Each coloring is validated, repaired if improper, and scored
/// against DSatur on the same graph.
inline ScoreResult import_and_score(const fs::path& colorings_dir, const fs::path& graphs_dir) {
    auto list_json = [](const fs::path& dir) {
        std::set<std::string> keys;
        if (!fs::is_directory(dir)) throw std::runtime_error("not a directory: " + dir.string());
        for (const auto& e : fs::directory_iterator(dir))
            if (e.is_regular_file() && e.path().extension() == ".json") keys.insert(e.path().stem().string());
        return keys;
    };
    const auto coloring_keys = list_json(colorings_dir);
    const auto graph_keys = list_json(graphs_dir);

    ScoreResult result;
    for (const auto& key : coloring_keys)
        if (!graph_keys.contains(key)) result.unmatched.push_back(key);
    for (const auto& key : graph_keys)
        if (!coloring_keys.contains(key)) result.unmatched.push_back(key);

    for (const auto& key : coloring_keys) {
        if (!graph_keys.contains(key)) continue;
        try {
            const GraphBundle bundle = import_graph(detail::read_file(graphs_dir / (key + ".json")));
            const ColoringDocument doc = import_coloring(detail::read_file(colorings_dir / (key + ".json")));
            if (static_cast<int>(doc.coloring.size()) != bundle.graph.num_vertices())
                throw std::invalid_argument("coloring has " + std::to_string(doc.coloring.size()) + " entries for " +
                                            std::to_string(bundle.graph.num_vertices()) + " vertices");
            const bool proper = validate_coloring(bundle.graph, doc.coloring).proper;
            const VertexColoring final_coloring = proper ? doc.coloring.compacted() : repair(bundle.graph, doc.coloring);
            const VertexColoring reference = dsatur(bundle.graph);

            MetricsRow row;
            row.users = bundle.meta.users;
            row.cache_nodes = bundle.meta.cache_nodes;
            row.t = bundle.meta.t;
            row.seed = bundle.meta.seed;
            row.packets = bundle.meta.packets;
            row.vertices = static_cast<std::size_t>(bundle.graph.num_vertices());
            row.edges = bundle.graph.num_edges();
            row.proper_before_repair = proper;
            row.s_external = final_coloring.used_colors();
            row.s_dsatur = reference.used_colors();
            row.r_dsatur = load(*row.s_dsatur, static_cast<std::int64_t>(row.packets));
            row.ratio_external_dsatur =
                load_ratio(load(*row.s_external, static_cast<std::int64_t>(row.packets)), *row.r_dsatur);
            result.rows.push_back(std::move(row));
        } catch (const std::exception& e) {
            result.rejected.emplace_back(key, e.what());
        }
    }
    return result;
}

}  // namespace macc
