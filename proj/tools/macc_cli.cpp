// Command-line driver for the multi-access coded caching pipeline.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include <macc/macc.hpp>

namespace {

struct Options {
    std::string users = "5";
    int caches = 4;
    std::string t = "2";
    int count = 1;
    std::string degree;  // empty: 1:Lambda
    std::uint64_t seed = 1;
    std::string out;
    std::string topology;
    int files = 0;
    int bits = macc::FileLibrary::kDefaultPacketBits;
    std::string stages = "all";
    std::string ic = "dp";
    std::string method = "all";
    std::string colorings;
    std::string graphs;
    bool trace = false;
    bool print_q = false;
};

macc::ExperimentSpec make_spec(const Options& o, bool t_given) {
    macc::ExperimentSpec spec;
    spec.users = macc::parse_int_list(o.users);
    spec.cache_nodes = o.caches;
    spec.t_values = macc::parse_int_list(o.t);
    spec.count = o.count;
    spec.degree = o.degree.empty() ? macc::DegreeRange{1, o.caches} : macc::parse_degree(o.degree);
    spec.base_seed = o.seed;
    spec.out_dir = o.out;
    spec.stages = macc::parse_stages(o.stages);
    spec.files = o.files;
    spec.packet_bits = o.bits;
    if (o.ic == "dp") spec.ic = macc::IcMethod::dp;
    else if (o.ic == "enum") spec.ic = macc::IcMethod::enumerate;
    else if (o.ic == "none") spec.ic = macc::IcMethod::none;
    else throw std::invalid_argument("--ic must be dp, enum or none");
    if (!o.topology.empty()) {
        spec.topology_file = o.topology;
        if (!t_given) spec.t_values.clear();
    }
    return spec;
}

/// The first instance of the experiment: the topology file if given, else a
/// generated topology for the first K and t.
macc::Instance single_instance(const macc::ExperimentSpec& spec) {
    macc::ExperimentSpec one = spec;
    if (!one.topology_file) {
        one.users.resize(1);
        one.t_values.resize(1);
        one.count = 1;
    }
    auto all = macc::enumerate_instances(one);
    return all.front();
}

int cmd_gen(const macc::ExperimentSpec& spec) {
    const auto instances = macc::enumerate_instances(spec);
    if (instances.size() == 1 && (spec.out_dir.empty() || spec.out_dir.has_extension())) {
        const auto& inst = instances.front();
        if (spec.out_dir.empty()) {
            macc::write_topology(std::cout, inst.topology, inst.t, inst.seed);
        } else {
            std::ostringstream os;
            macc::write_topology(os, inst.topology, inst.t, inst.seed);
            macc::detail::write_file(spec.out_dir, os.str());
        }
        return 0;
    }
    if (spec.out_dir.empty()) throw std::invalid_argument("gen: several topologies need --out DIR");
    for (const auto& inst : instances) {
        std::ostringstream os;
        macc::write_topology(os, inst.topology, inst.t, inst.seed);
        macc::detail::write_file(spec.out_dir / (inst.key() + ".topo"), os.str());
    }
    std::cout << instances.size() << " topologies written to " << spec.out_dir.string() << '\n';
    return 0;
}

int cmd_color(const macc::ExperimentSpec& spec, bool print_q) {
    const auto inst = single_instance(spec);
    const auto u = macc::derive_retrieve_array(inst.topology, inst.t);
    const auto bundle = macc::make_bundle(u, inst.seed);
    macc::ColoringStats stats;
    const auto coloring = macc::dsatur(bundle.graph, &stats);
    const auto q = macc::assemble_q(u.grid, bundle.graph, coloring);
    std::cout << "vertices " << bundle.graph.num_vertices() << " edges " << bundle.graph.num_edges() << " colors "
              << coloring.used_colors() << " load " << macc::format_rational(macc::load(q)) << " ops "
              << stats.operations << '\n';
    if (print_q) macc::write_pda(std::cout, q);
    if (!spec.out_dir.empty()) {
        macc::detail::write_file(spec.out_dir / "graphs" / (inst.key() + ".json"), macc::export_graph(bundle).dump() + "\n");
        macc::detail::write_file(spec.out_dir / "labels" / (inst.key() + ".json"),
                                 macc::export_coloring(coloring, "dsatur").dump() + "\n");
    }
    return 0;
}

int cmd_bound(const macc::ExperimentSpec& spec, const std::string& method, bool trace) {
    const auto inst = single_instance(spec);
    const auto family = macc::DemandSetFamily::from(macc::derive_retrieve_array(inst.topology, inst.t));
    if (method == "all" || method == "greedy") {
        const auto r = macc::greedy_converse(family);
        std::cout << macc::report_line(r) << '\n';
        if (trace)
            for (const auto& step : r.trace) {
                std::cout << "#";
                for (std::size_t i = 0; i < step.remaining.size(); ++i)
                    std::cout << ' ' << step.remaining[i] + 1 << ':' << step.intersection_sizes[i];
                std::cout << " -> " << step.chosen + 1 << " |S|=" << step.accumulated_size << " sum=" << step.cumulative
                          << '\n';
            }
    }
    if (method == "all" || method == "ic-dp" || method == "ic")
        std::cout << macc::report_line(macc::ic_converse_dp(family)) << '\n';
    if (method == "ic-enum") std::cout << macc::report_line(macc::ic_converse_enum(family)) << '\n';
    if (method != "all" && method != "greedy" && method != "ic" && method != "ic-dp" && method != "ic-enum")
        throw std::invalid_argument("--method must be greedy, ic, ic-dp, ic-enum or all");
    return 0;
}

int cmd_simulate(const macc::ExperimentSpec& spec) {
    macc::ExperimentSpec s = spec;
    s.stages = {macc::Stage::graph, macc::Stage::color, macc::Stage::simulate};
    const auto inst = single_instance(s);
    const auto res = macc::run_instance(s, inst);
    if (!res.row.error.empty()) throw std::runtime_error(res.row.error);
    std::cout << "decode " << (*res.row.decode_ok ? "ok" : "FAILED") << " users " << res.row.users << " blocks "
              << *res.row.s_dsatur << " load " << macc::format_rational(*res.row.r_dsatur) << '\n';
    return *res.row.decode_ok ? 0 : 1;
}

int cmd_export(const macc::ExperimentSpec& spec) {
    const auto summary = macc::export_dataset(spec);
    std::cout << "graphs " << summary.graphs << " vertices " << summary.vertices << " degree_mean "
              << summary.degree_mean << " degree_variance " << summary.degree_variance << '\n';
    return 0;
}

int cmd_import(const Options& o) {
    if (o.colorings.empty() || o.graphs.empty())
        throw std::invalid_argument("import-colorings needs --colorings DIR and --graphs DIR");
    const auto result = macc::import_and_score(o.colorings, o.graphs);
    for (const auto& key : result.unmatched) std::cerr << "unmatched: " << key << '\n';
    for (const auto& [key, why] : result.rejected) std::cerr << "rejected: " << key << ": " << why << '\n';
    std::ostringstream os;
    macc::write_metrics(os, result.rows);
    if (o.out.empty()) std::cout << os.str();
    else macc::detail::write_file(o.out, os.str());
    return result.rejected.empty() && result.unmatched.empty() ? 0 : 2;
}

int cmd_report(const macc::ExperimentSpec& spec) {
    const auto start = std::chrono::steady_clock::now();
    const auto result = macc::run_batch(spec);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (spec.out_dir.empty()) {
        macc::write_metrics(std::cout, result.rows);
    } else {
        std::printf("%4s %4s %4s %6s %14s %14s\n", "K", "L", "t", "n", "greedy/ic", "dsatur/ic");
        for (const auto& r : result.rows) {
            if (!r.aggregate) continue;
            std::printf("%4d %4d %4d %6zu %14s %14s\n", r.users, r.cache_nodes, r.t, r.instances,
                        r.ratio_greedy_ic ? macc::detail::fixed9(*r.ratio_greedy_ic).c_str() : "-",
                        r.ratio_dsatur_ic ? macc::detail::fixed9(*r.ratio_dsatur_ic).c_str() : "-");
        }
    }
    // advisory only, never written to the artifacts
    std::fprintf(stderr, "%zu rows, %zu failures, %.3f s\n", result.rows.size(), result.failures, seconds);
    return result.failures ? 2 : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-access coded caching: placement, conflict-graph coloring and converse bounds"};
    app.require_subcommand(1);
    app.set_config("--config", "", "flat key=value file mirroring the long options");

    Options o;
    app.add_option("--users", o.users, "K, list such as 4,6,8..10")->capture_default_str();
    app.add_option("--caches", o.caches, "Lambda")->capture_default_str();
    auto* t_opt = app.add_option("--t", o.t, "t, list such as 1..9")->capture_default_str();
    app.add_option("--count", o.count, "topologies per (K, t)")->capture_default_str();
    app.add_option("--degree", o.degree, "access degree range lo:hi (default 1:Lambda)");
    app.add_option("--seed", o.seed, "base seed")->capture_default_str();
    app.add_option("--out", o.out, "output directory (or file for gen and import-colorings)");
    app.add_option("--topology", o.topology, "topology file overriding the generator")->check(CLI::ExistingFile);
    app.add_option("--files", o.files, "N, library size (default K)");
    app.add_option("--bits", o.bits, "packet size in bits")->capture_default_str();
    app.add_option("--stages", o.stages, "graph,color,bound,simulate | all | none")->capture_default_str();
    app.add_option("--ic", o.ic, "IC converse in report: dp, enum or none")->capture_default_str();
    app.add_option("--method", o.method, "bound: greedy, ic-dp, ic-enum or all")->capture_default_str();
    app.add_option("--colorings", o.colorings, "directory of coloring documents");
    app.add_option("--graphs", o.graphs, "directory of graph documents");
    app.add_flag("--trace", o.trace, "bound: print the greedy trace");
    app.add_flag("--print-q", o.print_q, "color: print the delivery array");

    auto* gen = app.add_subcommand("gen", "generate access topologies")->fallthrough();
    auto* color = app.add_subcommand("color", "DSatur coloring and delivery array for one instance")->fallthrough();
    auto* bound = app.add_subcommand("bound", "greedy and IC converse bounds for one instance")->fallthrough();
    auto* simulate = app.add_subcommand("simulate", "end-to-end coded delivery and decoding")->fallthrough();
    auto* exp = app.add_subcommand("export-dataset", "graph and DSatur label documents")->fallthrough();
    auto* imp = app.add_subcommand("import-colorings", "validate, repair and score external colorings")->fallthrough();
    auto* report = app.add_subcommand("report", "batch run with metrics table")->fallthrough();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*imp) return cmd_import(o);
        const auto spec = make_spec(o, t_opt->count() > 0);
        if (*gen) return cmd_gen(spec);
        if (*color) return cmd_color(spec, o.print_q);
        if (*bound) return cmd_bound(spec, o.method, o.trace);
        if (*simulate) return cmd_simulate(spec);
        if (*exp) return cmd_export(spec);
        if (*report) return cmd_report(spec);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
