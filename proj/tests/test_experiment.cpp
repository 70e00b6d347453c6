#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace macc;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class TempDir {
public:
    TempDir() {
        static int counter = 0;
        path_ = fs::temp_directory_path() /
                ("macc_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    const fs::path& path() const { return path_; }

private:
    fs::path path_;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(dir))
        if (e.is_regular_file()) out[fs::relative(e.path(), dir).string()] = slurp(e.path());
    return out;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (!line.empty() && line.back() == ',') cells.emplace_back();
        rows.push_back(cells);
    }
    return rows;
}

fs::path example_topology_file() { return fs::path(MACC_TEST_DATA) / "example1.topo"; }

ExperimentSpec small_spec(const fs::path& out) {
    ExperimentSpec spec;
    spec.users = {4, 6};
    spec.cache_nodes = 5;
    spec.t_values = {1, 2};
    spec.count = 4;
    spec.degree = {1, 3};
    spec.base_seed = 100;
    spec.out_dir = out;
    return spec;
}

}  // namespace

TEST(Parsing, IntLists) {
    EXPECT_EQ(parse_int_list("4"), (std::vector<int>{4}));
    EXPECT_EQ(parse_int_list("1..4"), (std::vector<int>{1, 2, 3, 4}));
    EXPECT_EQ(parse_int_list("2,5..6,9"), (std::vector<int>{2, 5, 6, 9}));
    EXPECT_THROW(parse_int_list("4..2"), std::invalid_argument);
    EXPECT_THROW(parse_int_list("a"), std::invalid_argument);
}

TEST(Parsing, DegreeAndStages) {
    const auto d = parse_degree("2:7");
    EXPECT_EQ(d.lo, 2);
    EXPECT_EQ(d.hi, 7);
    EXPECT_EQ(parse_degree("3").hi, 3);
    EXPECT_THROW(parse_degree("x:2"), std::invalid_argument);
    EXPECT_EQ(parse_stages("all").size(), 4u);
    EXPECT_TRUE(parse_stages("none").empty());
    EXPECT_TRUE(parse_stages("").empty());
    EXPECT_EQ(parse_stages("bound,graph"), (std::set<Stage>{Stage::graph, Stage::bound}));
    EXPECT_THROW(parse_stages("colour"), std::invalid_argument);
}

TEST(ExperimentSpec, Validation) {
    ExperimentSpec s;
    EXPECT_NO_THROW(s.validate());
    s.degree = {1, 5};
    EXPECT_THROW(s.validate(), std::invalid_argument);
    s = {};
    s.t_values = {5};
    EXPECT_THROW(s.validate(), std::invalid_argument);
    s = {};
    s.users = {};
    EXPECT_THROW(s.validate(), std::invalid_argument);
}

TEST(Instances, SeedsAreBasePlusIndexPerConfig) {
    ExperimentSpec spec = small_spec({});
    const auto all = enumerate_instances(spec);
    ASSERT_EQ(all.size(), 16u);
    for (std::size_t i = 0; i < all.size(); ++i) {
        EXPECT_EQ(all[i].seed, 100 + i % 4);
        EXPECT_EQ(all[i].topology, generate_topology(all[i].topology.users(), 5, {1, 3}, all[i].seed));
    }
    // every t of a given K reuses the same topologies
    EXPECT_EQ(all[0].topology, all[4].topology);
    EXPECT_EQ(all[0].t, 1);
    EXPECT_EQ(all[4].t, 2);
    EXPECT_EQ(all[0].key(), "K4_L5_t1_s100");
}

TEST(RunBatch, ExampleTopologyOverride) {
    ExperimentSpec spec;
    spec.topology_file = example_topology_file();
    spec.t_values = {};
    const auto result = run_batch(spec);
    ASSERT_EQ(result.rows.size(), 2u);  // the instance and its aggregate
    const auto& row = result.rows[0];
    EXPECT_TRUE(row.error.empty()) << row.error;
    EXPECT_EQ(row.users, 5);
    EXPECT_EQ(row.t, 2);
    EXPECT_EQ(row.packets, 6u);
    EXPECT_EQ(row.r_greedy, Rational(2, 3));
    EXPECT_EQ(row.r_ic, Rational(2, 3));
    EXPECT_EQ(row.ratio_greedy_ic, 1.0);
    EXPECT_EQ(row.vertices, 11u);
    EXPECT_EQ(row.decode_ok, true);
    EXPECT_EQ(row.greedy_work, 15u);
    EXPECT_EQ(row.ic_work, 32u);
    EXPECT_GE(*row.r_dsatur, *row.r_ic);
    EXPECT_TRUE(result.rows[1].aggregate);
}

TEST(RunBatch, EmptyStagesWriteMetadataOnly) {
    TempDir dir;
    ExperimentSpec spec = small_spec(dir.path());
    spec.stages = {};
    const auto result = run_batch(spec);
    EXPECT_TRUE(result.rows.empty());
    EXPECT_EQ(slurp(dir.path() / "metrics.csv"), std::string(kMetricsHeader) + "\n");
    const std::string config = slurp(dir.path() / "config.txt");
    EXPECT_NE(config.find("rng=mt19937_64"), std::string::npos);
    EXPECT_NE(config.find("seed=100"), std::string::npos);
    EXPECT_FALSE(fs::exists(dir.path() / "graphs"));
}

TEST(RunBatch, ByteIdenticalReruns) {
    TempDir a, b;
    run_batch(small_spec(a.path()));
    run_batch(small_spec(b.path()));
    const auto sa = snapshot(a.path());
    EXPECT_EQ(sa, snapshot(b.path()));
    EXPECT_EQ(sa.size(), 2u + 16u);  // config, metrics and one graph per instance
}

TEST(RunBatch, AggregatesAreMeansOfTheTable) {
    TempDir dir;
    const auto result = run_batch(small_spec(dir.path()));
    EXPECT_EQ(result.failures, 0u);
    const auto table = parse_csv(slurp(dir.path() / "metrics.csv"));
    const auto& header = table.front();
    auto col = [&](const std::string& name) {
        return static_cast<std::size_t>(std::find(header.begin(), header.end(), name) - header.begin());
    };
    ASSERT_LT(col("ratio_dsatur_ic"), header.size());
    auto rational = [](const std::string& s) {
        const auto slash = s.find('/');
        return std::stod(s.substr(0, slash)) / std::stod(s.substr(slash + 1));
    };

    std::map<std::string, std::vector<const std::vector<std::string>*>> groups;
    int agg_rows = 0;
    for (std::size_t i = 1; i < table.size(); ++i) {
        const auto& r = table[i];
        ASSERT_EQ(r.size(), header.size()) << i;
        const std::string key = r[col("K")] + "/" + r[col("t")];
        if (r[col("agg")] == "0") {
            groups[key].push_back(&r);
            continue;
        }
        ++agg_rows;
        const auto& g = groups.at(key);
        EXPECT_EQ(r[col("instances")], std::to_string(g.size()));
        for (const std::string name : {"ratio_greedy_ic", "ratio_dsatur_ic"}) {
            double sum = 0;
            for (const auto* inst : g) sum += std::stod((*inst)[col(name)]);
            EXPECT_NEAR(std::stod(r[col(name)]), sum / g.size(), 1e-8) << key << " " << name;
        }
        for (const std::string name : {"R_greedy", "R_ic", "R_dsatur"}) {
            double sum = 0;
            for (const auto* inst : g) sum += rational((*inst)[col(name)]);
            EXPECT_NEAR(std::stod(r[col(name)]), sum / g.size(), 1e-8) << key << " " << name;
        }
    }
    EXPECT_EQ(agg_rows, 4);
}

TEST(RunBatch, RatiosOnlyWithBothOperands) {
    ExperimentSpec spec = small_spec({});
    spec.stages = {Stage::bound};
    for (const auto& row : run_batch(spec).rows) {
        if (row.aggregate) continue;
        EXPECT_FALSE(row.s_dsatur);
        EXPECT_FALSE(row.ratio_dsatur_ic);
        EXPECT_TRUE(row.ratio_greedy_ic);
        EXPECT_NE(to_csv(row).find(",,"), std::string::npos);
    }
    spec.ic = IcMethod::none;
    for (const auto& row : run_batch(spec).rows) {
        EXPECT_FALSE(row.ratio_greedy_ic);
        EXPECT_FALSE(row.r_ic);
    }
}

TEST(RunBatch, FailuresAreRecordedPerInstance) {
    ExperimentSpec spec = small_spec({});
    spec.files = 5;  // fewer files than the six-user configs need for distinct demands
    const auto result = run_batch(spec);
    EXPECT_EQ(result.failures, 8u);
    std::size_t ok = 0;
    for (const auto& row : result.rows)
        if (!row.aggregate && row.error.empty()) ++ok;
    EXPECT_EQ(ok, 8u);
    for (const auto& row : result.rows)
        if (!row.aggregate && !row.error.empty()) { EXPECT_EQ(row.users, 6); }
}

TEST(RunBatch, CsvEscapesErrors) {
    MetricsRow r;
    r.error = "bad, \"thing\"";
    const std::string line = to_csv(r);
    EXPECT_NE(line.find("\"bad, \"\"thing\"\"\""), std::string::npos);
}

TEST(ExportDataset, OneInstance) {
    TempDir dir;
    ExperimentSpec spec;
    spec.topology_file = example_topology_file();
    spec.t_values = {};
    spec.out_dir = dir.path();
    const auto summary = export_dataset(spec);
    EXPECT_EQ(summary.graphs, 1u);
    EXPECT_EQ(summary.vertices, 11u);
    const auto files = snapshot(dir.path());
    ASSERT_EQ(files.size(), 3u);
    const auto graph = import_graph(files.at("graphs/K5_L4_t2_s0.json"));
    const auto labels = import_coloring(files.at("labels/K5_L4_t2_s0.json"));
    EXPECT_EQ(labels.coloring, dsatur(graph.graph));
    EXPECT_EQ(labels.source, "dsatur");

    double sum = 0, sq = 0;
    for (int v = 0; v < graph.graph.num_vertices(); ++v) {
        sum += graph.graph.degree(v);
        sq += graph.graph.degree(v) * graph.graph.degree(v);
    }
    const double n = graph.graph.num_vertices();
    const json stats = json::parse(files.at("stats.json"));
    EXPECT_NEAR(stats["degree_mean"].get<double>(), sum / n, 1e-12);
    EXPECT_NEAR(stats["degree_variance"].get<double>(), sq / n - (sum / n) * (sum / n), 1e-9);
    EXPECT_EQ(stats["num_graphs"], 1);
}

TEST(ExportDataset, StatsPoolAllVertices) {
    TempDir dir;
    ExperimentSpec spec = small_spec(dir.path());
    const auto summary = export_dataset(spec);
    EXPECT_EQ(summary.graphs, dataset_size(spec));
    std::vector<double> degrees;
    for (const auto& e : fs::directory_iterator(dir.path() / "graphs")) {
        const auto b = import_graph(slurp(e.path()));
        for (int v = 0; v < b.graph.num_vertices(); ++v) degrees.push_back(b.graph.degree(v));
    }
    double mean = 0;
    for (double d : degrees) mean += d;
    mean /= degrees.size();
    double var = 0;
    for (double d : degrees) var += (d - mean) * (d - mean);
    var /= degrees.size();
    EXPECT_NEAR(summary.degree_mean, mean, 1e-9);
    EXPECT_NEAR(summary.degree_variance, var, 1e-6);
}

TEST(ExportDataset, ReexportIsByteIdentical) {
    TempDir a, b;
    export_dataset(small_spec(a.path()));
    export_dataset(small_spec(b.path()));
    EXPECT_EQ(snapshot(a.path()), snapshot(b.path()));
    export_dataset(small_spec(a.path()));
    EXPECT_EQ(snapshot(a.path()), snapshot(b.path()));
}

TEST(ExportDataset, TrainingShape) {
    ExperimentSpec spec;
    spec.users = parse_int_list("4..20");
    spec.cache_nodes = 10;
    spec.t_values = {2};
    spec.count = 1500;
    spec.degree = {1, 10};
    EXPECT_EQ(dataset_size(spec), 25500u);
}

TEST(ExportDataset, UnwritableDirectory) {
    TempDir dir;
    std::ofstream(dir.path() / "blocker") << "x";
    ExperimentSpec spec = small_spec(dir.path() / "blocker" / "sub");
    EXPECT_THROW(export_dataset(spec), std::runtime_error);
    spec.out_dir.clear();
    EXPECT_THROW(export_dataset(spec), std::invalid_argument);
}

TEST(ImportAndScore, OwnLabelsAreProper) {
    TempDir dir;
    export_dataset(small_spec(dir.path()));
    const auto r = import_and_score(dir.path() / "labels", dir.path() / "graphs");
    EXPECT_EQ(r.rows.size(), 16u);
    EXPECT_TRUE(r.unmatched.empty());
    EXPECT_TRUE(r.rejected.empty());
    for (const auto& row : r.rows) {
        EXPECT_EQ(row.proper_before_repair, true);
        EXPECT_EQ(row.s_external, row.s_dsatur);
        EXPECT_EQ(row.ratio_external_dsatur, 1.0);
    }
}

TEST(ImportAndScore, ImproperColoringIsRepaired) {
    TempDir dir;
    fs::create_directories(dir.path() / "graphs");
    fs::create_directories(dir.path() / "colorings");
    StarGrid u(3, 3);
    for (int i = 0; i < 3; ++i) u.set_star(i, i);
    const GraphBundle b{build_conflict_graph(u), {3, 3, 1, 3, 0, {{0}, {1}, {2}}}};
    std::ofstream(dir.path() / "graphs" / "g.json") << export_graph(b).dump();
    std::ofstream(dir.path() / "colorings" / "g.json") << export_coloring(VertexColoring({1, 1, 1, 1, 1, 1}), "test").dump();
    const auto r = import_and_score(dir.path() / "colorings", dir.path() / "graphs");
    ASSERT_EQ(r.rows.size(), 1u);
    EXPECT_EQ(r.rows[0].proper_before_repair, false);
    EXPECT_GE(*r.rows[0].s_external, 3);
    EXPECT_EQ(r.rows[0].s_dsatur, 3);
}

TEST(ImportAndScore, CorruptAndUnmatchedFiles) {
    TempDir dir;
    export_dataset(small_spec(dir.path()));
    const auto labels = dir.path() / "labels";
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(labels)) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    std::ofstream(files[0]) << "{\"schema\":1,\"colors\":[0],";          // corrupt
    std::ofstream(files[1]) << export_coloring(VertexColoring({1}), "x").dump();  // wrong length
    fs::remove(files[2]);
    std::ofstream(labels / "orphan.json") << export_coloring(VertexColoring({1}), "x").dump();
    const auto r = import_and_score(labels, dir.path() / "graphs");
    EXPECT_EQ(r.rows.size(), 13u);
    EXPECT_EQ(r.rejected.size(), 2u);
    EXPECT_EQ(r.unmatched.size(), 2u);
    EXPECT_THROW(import_and_score(dir.path() / "nope", dir.path() / "graphs"), std::runtime_error);
}
