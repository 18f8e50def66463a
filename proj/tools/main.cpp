// facadegen: build genealogies from binary trait observations of buildings.
// One subcommand per pipeline stage; every run writes its outputs plus a
// manifest.json sufficient to reproduce it byte for byte.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "facadegen/core.hpp"
#include "facadegen/ingest.hpp"
#include "facadegen/neighbornet.hpp"
#include "facadegen/njtree.hpp"
#include "facadegen/seriation.hpp"
#include "facadegen/sha256.hpp"
#include "facadegen/simulate.hpp"
#include "facadegen/splitsgraph.hpp"

namespace fg = facadegen;
using nlohmann::ordered_json;

namespace {

constexpr const char* kVersion = "0.1.0";

std::string fmt(const char* spec, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

// Collects outputs and parameters for the manifest as the command runs.
struct Run {
    std::string command;
    std::filesystem::path out_dir;
    ordered_json params = ordered_json::object();
    std::vector<std::pair<std::string, std::string>> inputs;  // path, digest
    std::vector<std::string> outputs;

    explicit Run(std::string cmd, const std::string& dir) : command(std::move(cmd)), out_dir(dir) {
        std::filesystem::create_directories(out_dir);
    }

    void input(const std::string& path) { inputs.emplace_back(path, fg::sha256_file(path)); }

    void write(const std::string& name, const std::string& content) {
        const auto path = out_dir / name;
        std::ofstream out(path, std::ios::binary);
        if (!out) throw fg::Error("io", "cannot write '" + path.string() + "'");
        out << content;
        if (!out) throw fg::Error("io", "failed writing '" + path.string() + "'");
        outputs.push_back(name);
    }

    void finish() {
        ordered_json m;
        m["command"] = command;
        m["version"] = kVersion;
        m["inputs"] = ordered_json::array();
        for (const auto& [path, digest] : inputs)
            m["inputs"].push_back({{"path", path}, {"sha256", digest}});
        m["parameters"] = params;
        m["outputs"] = outputs;
        write("manifest.json", m.dump(2) + "\n");
    }
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw fg::Error("io", "cannot read file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> read_lines(const std::string& path) {
    std::istringstream in(read_file(path));
    std::vector<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) out.push_back(line);
    }
    return out;
}

fg::SplitRatios parse_ratio(const std::string& text) {
    fg::SplitRatios r;
    if (std::sscanf(text.c_str(), "%d:%d:%d", &r.train, &r.validation, &r.test) != 3)
        throw fg::Error("usage", "ratio must look like 70:15:15");
    return r;
}

// Shared flags every subcommand carries.
struct Common {
    std::uint64_t seed = 0;
    std::string out_dir = "out";
    std::string metric = "hamming-normalized";
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--seed", c.seed, "Random seed")->capture_default_str();
    cmd->add_option("--out-dir", c.out_dir, "Output directory")->capture_default_str();
    cmd->add_option("--metric", c.metric, "Distance metric: hamming, hamming-normalized, jaccard")
        ->capture_default_str();
    cmd->set_config("--config", "", "Plain key=value config file; flags take precedence");
}

void common_params(Run& run, const Common& c) {
    run.params["seed"] = c.seed;
    run.params["metric"] = c.metric;
}

std::string battleship_svg(const fg::TraitMatrix& m, const std::vector<std::size_t>& order) {
    const double cell = 16.0, left = 90.0, top = 110.0;
    const double width = left + cell * static_cast<double>(m.trait_count()) + 20.0;
    const double height = top + cell * static_cast<double>(m.taxa_count()) + 20.0;
    std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
                      fmt("%.0f", width) + "\" height=\"" + fmt("%.0f", height) + "\">\n";
    for (std::size_t k = 0; k < m.trait_count(); ++k) {
        const double x = left + cell * static_cast<double>(k) + cell / 2.0;
        svg += "  <text x=\"" + fmt("%.1f", x) + "\" y=\"" + fmt("%.1f", top - 6.0) +
               "\" font-size=\"10\" transform=\"rotate(-60 " + fmt("%.1f", x) + " " +
               fmt("%.1f", top - 6.0) + ")\">" + m.catalog().name(k) + "</text>\n";
    }
    for (std::size_t row = 0; row < order.size(); ++row) {
        const double y = top + cell * static_cast<double>(row);
        svg += "  <text x=\"4\" y=\"" + fmt("%.1f", y + cell - 4.0) +
               "\" font-size=\"10\">" + m.taxon(order[row]) + "</text>\n";
        for (std::size_t k = 0; k < m.trait_count(); ++k) {
            const double x = left + cell * static_cast<double>(k);
            const bool on = m.row(order[row]).bits[k] != 0;
            svg += "  <rect x=\"" + fmt("%.1f", x) + "\" y=\"" + fmt("%.1f", y) +
                   "\" width=\"" + fmt("%.1f", cell - 2.0) + "\" height=\"" +
                   fmt("%.1f", cell - 2.0) + "\" fill=\"" + (on ? "#26456e" : "#eeeeee") +
                   "\"/>\n";
        }
    }
    svg += "</svg>\n";
    return svg;
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

int cmd_ingest(const Common& c, const std::string& detections, const std::string& traits,
               double tau) {
    Run run("ingest", c.out_dir);
    run.input(detections);
    run.input(traits);
    common_params(run, c);
    run.params["tau"] = tau;

    const fg::TraitCatalog catalog(read_lines(traits));
    const auto records = fg::read_detections(detections);
    const auto buildings = fg::detections_to_buildings(records, catalog, tau);

    std::vector<std::string> ids;
    std::vector<fg::TraitVector> rows;
    std::string variants;
    for (const auto& b : buildings) {
        ids.push_back(b.building_id);
        rows.push_back(b.vector);
        if (b.variant_flag) variants += b.building_id + "\n";
    }
    run.write("buildings.csv", fg::trait_csv_text(fg::TraitMatrix(catalog, ids, rows)));
    run.write("variants.txt", variants);
    run.finish();
    return 0;
}

int cmd_stats(const Common& c, const std::string& input) {
    Run run("stats", c.out_dir);
    run.input(input);
    common_params(run, c);

    const fg::TraitMatrix m = fg::read_trait_csv(input);
    const auto freq = fg::trait_frequencies(m);
    const fg::PhiMatrix phi = fg::phi_correlation(m);

    ordered_json j;
    j["taxa"] = m.taxa_count();
    j["traits"] = m.trait_count();
    j["frequencies"] = ordered_json::array();
    for (const auto& f : freq) {
        ordered_json e;
        e["trait"] = f.trait;
        e["count"] = f.count;
        e["percentage"] = std::round(f.percentage * 100.0) / 100.0;
        j["frequencies"].push_back(e);
    }
    j["phi"] = ordered_json::object();
    j["phi"]["constant_columns"] = ordered_json::array();
    for (std::size_t k = 0; k < m.trait_count(); ++k)
        if (phi.constant_column[k]) j["phi"]["constant_columns"].push_back(m.catalog().name(k));
    j["phi"]["values"] = ordered_json::array();
    for (std::size_t i = 0; i < m.trait_count(); ++i) {
        ordered_json row = ordered_json::array();
        for (std::size_t k = 0; k < m.trait_count(); ++k) row.push_back(phi.at(i, k));
        j["phi"]["values"].push_back(row);
    }
    run.write("stats.json", j.dump(2) + "\n");
    run.finish();
    return 0;
}

int cmd_types(const Common& c, const std::string& input, std::size_t threshold) {
    Run run("types", c.out_dir);
    run.input(input);
    common_params(run, c);
    run.params["threshold"] = threshold;

    const fg::TraitMatrix m = fg::read_trait_csv(input);
    std::vector<fg::BuildingRecord> buildings;
    for (std::size_t i = 0; i < m.taxa_count(); ++i) {
        fg::BuildingRecord b;
        b.building_id = m.taxon(i);
        b.vector = m.row(i);
        b.variant_flag = b.vector.all_zero();
        buildings.push_back(std::move(b));
    }
    const fg::TypeDerivation d = fg::derive_types(buildings, threshold);

    run.write("types.csv", fg::type_catalog_csv(d.catalog, m.catalog()));
    std::string leftovers;
    for (const auto& id : d.leftover_ids) leftovers += id + "\n";
    run.write("leftovers.txt", leftovers);
    std::string variants;
    for (const auto& id : d.variant_ids) variants += id + "\n";
    run.write("variants.txt", variants);
    run.finish();
    return 0;
}

int cmd_split_dataset(const Common& c, const std::string& input, std::size_t rare_cutoff,
                      const std::string& rare_ratio, const std::string& common_ratio) {
    Run run("split-dataset", c.out_dir);
    run.input(input);
    common_params(run, c);
    run.params["rare_cutoff"] = rare_cutoff;
    run.params["rare_ratio"] = rare_ratio;
    run.params["common_ratio"] = common_ratio;

    std::map<std::string, std::vector<std::string>> classes;
    std::vector<std::pair<std::string, std::string>> rows;  // instance, class
    const auto lines = read_lines(input);
    if (lines.empty() || lines[0] != "instance_id,class")
        throw fg::Error("parse", input + ":1: header must be 'instance_id,class'");
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto comma = lines[i].find(',');
        if (comma == std::string::npos)
            throw fg::Error("parse", input + ":" + std::to_string(i + 1) + ": expected 2 cells");
        const std::string id = lines[i].substr(0, comma);
        const std::string cls = lines[i].substr(comma + 1);
        classes[cls].push_back(id);
        rows.emplace_back(id, cls);
    }

    const fg::SplitAssignment split = fg::stratified_split(
        classes, c.seed, rare_cutoff, parse_ratio(rare_ratio), parse_ratio(common_ratio));

    std::map<std::string, std::string> subset_of;
    for (const auto& [cls, parts] : split.classes) {
        for (const auto& id : parts.train) subset_of[cls + "\x1f" + id] = "train";
        for (const auto& id : parts.validation) subset_of[cls + "\x1f" + id] = "validation";
        for (const auto& id : parts.test) subset_of[cls + "\x1f" + id] = "test";
    }
    std::string csv = "instance_id,class,subset\n";
    for (const auto& [id, cls] : rows)
        csv += id + "," + cls + "," + subset_of.at(cls + "\x1f" + id) + "\n";
    run.write("split.csv", csv);
    run.finish();
    return 0;
}

int cmd_seriate(const Common& c, const std::string& input, std::size_t restarts,
                std::size_t groups) {
    Run run("seriate", c.out_dir);
    run.input(input);
    common_params(run, c);
    run.params["restarts"] = restarts;
    run.params["groups"] = groups;

    const fg::TraitMatrix m = fg::read_trait_csv(input);
    const fg::SeriationResult r = fg::seriate(m, restarts, c.seed);

    std::string csv = "position,taxon,criterion\n";
    for (std::size_t pos = 0; pos < r.order.size(); ++pos)
        csv += std::to_string(pos + 1) + "," + m.taxon(r.order[pos]) + "," +
               std::to_string(r.criterion) + "\n";
    run.write("order.csv", csv);
    run.write("plot.svg", battleship_svg(m, r.order));

    if (groups > 0) {
        const fg::DistanceMatrix d = fg::distance_matrix(m, fg::parse_metric(c.metric));
        const auto segs = fg::segment_order(r, d, groups);
        std::string gcsv = "group,taxon\n";
        for (std::size_t gi = 0; gi < segs.size(); ++gi)
            for (std::size_t t : segs[gi])
                gcsv += std::to_string(gi + 1) + "," + m.taxon(t) + "\n";
        run.write("groups.csv", gcsv);
    }
    run.finish();
    return 0;
}

int cmd_nj(const Common& c, const std::string& input, bool clamp, int precision) {
    Run run("nj", c.out_dir);
    run.input(input);
    common_params(run, c);
    run.params["clamp_negative"] = clamp;
    run.params["precision"] = precision;

    const fg::TraitMatrix m = fg::read_trait_csv(input);
    const fg::DistanceMatrix d = fg::distance_matrix(m, fg::parse_metric(c.metric));
    const fg::PhyloTree t = fg::nj(d, clamp);
    run.write("tree.nwk", fg::to_newick(t, precision) + "\n");

    std::string cherries_csv = "leaf_a,leaf_b\n";
    for (const auto& [a, b] : fg::cherries(t)) cherries_csv += a + "," + b + "\n";
    run.write("cherries.csv", cherries_csv);

    const double fit = fg::ls_fit(d, fg::tree_distance_matrix(t));
    std::string report = "taxa=" + std::to_string(d.size()) + "\n";
    report += "ls_fit=" + fmt("%.6f", fit) + "\n";
    run.write("report.txt", report);
    run.finish();
    return 0;
}

int cmd_nnet(const Common& c, const std::string& input, double threshold) {
    Run run("nnet", c.out_dir);
    run.input(input);
    common_params(run, c);
    run.params["weight_threshold"] = threshold;

    const fg::TraitMatrix m = fg::read_trait_csv(input);
    const fg::DistanceMatrix d = fg::distance_matrix(m, fg::parse_metric(c.metric));
    const fg::SplitSystem sys = fg::neighbor_net(d, threshold);

    run.write("splits.txt", fg::write_splits_text(sys));
    std::string csv = "weight,side-members\n";
    for (const auto& s : sys.splits) {
        csv += fmt("%.9f", s.weight) + ",";
        for (std::size_t i = 0; i < s.side.size(); ++i) {
            if (i) csv += ';';
            csv += sys.taxa[s.side[i]];
        }
        csv += '\n';
    }
    run.write("splits.csv", csv);

    std::string report = "taxa=" + std::to_string(d.size()) + "\n";
    report += "splits=" + std::to_string(sys.splits.size()) + "\n";
    report += "ls_fit=" + fmt("%.6f", fg::ls_fit(d, sys.split_metric())) + "\n";
    if (d.size() >= 4)
        report += "delta=" + fmt("%.6f", fg::delta_score(d, {}, c.seed)) + "\n";
    run.write("report.txt", report);
    run.finish();
    return 0;
}

int cmd_graph(const Common& c, const std::string& splits_path, const std::string& labels_path,
              std::size_t clusters, int precision) {
    Run run("graph", c.out_dir);
    run.input(splits_path);
    common_params(run, c);
    run.params["clusters"] = clusters;
    run.params["precision"] = precision;

    fg::SplitSystem sys = fg::read_splits_file(splits_path);
    if (!labels_path.empty()) {
        run.input(labels_path);
        const auto labels = read_lines(labels_path);
        if (labels.size() != sys.taxa.size())
            throw fg::Error("validation", "label file must list exactly " +
                                              std::to_string(sys.taxa.size()) + " names");
        sys.taxa = labels;
    }

    fg::SplitsGraph g = fg::build_splits_graph(sys);
    fg::equal_angle_layout(g, sys);
    const double err = fg::verify_graph_metric(g, sys);
    const bool compatible = fg::splits_compatible_system(sys);

    run.write("graph.dot", fg::to_dot(g));
    std::optional<fg::StyleClusters> styles;
    if (clusters > 0) {
        styles = fg::cluster_styles(sys.split_metric(), clusters);
        std::string csv = "taxon,cluster\n";
        for (std::size_t t = 0; t < sys.taxa.size(); ++t)
            csv += sys.taxa[t] + "," + std::to_string(styles->assignment[t]) + "\n";
        run.write("clusters.csv", csv);
    }
    run.write("graph.svg", fg::to_svg(g, styles ? &*styles : nullptr));
    if (compatible) run.write("network.nwk", fg::to_newick(fg::splits_tree(sys), precision) + "\n");

    std::string report = "nodes=" + std::to_string(g.nodes.size()) + "\n";
    report += "edges=" + std::to_string(g.edges.size()) + "\n";
    report += "metric_error=" + fmt("%.3e", err) + "\n";
    report += std::string("compatible=") + (compatible ? "true" : "false") + "\n";
    run.write("report.txt", report);
    run.finish();
    return 0;
}

int cmd_cluster(const Common& c, const std::string& input, const std::string& splits_path,
                std::size_t k) {
    Run run("cluster", c.out_dir);
    common_params(run, c);
    run.params["k"] = k;

    std::vector<std::string> taxa;
    std::optional<fg::DistanceMatrix> d;
    if (!input.empty()) {
        run.input(input);
        const fg::TraitMatrix m = fg::read_trait_csv(input);
        d = fg::distance_matrix(m, fg::parse_metric(c.metric));
    } else if (!splits_path.empty()) {
        run.input(splits_path);
        d = fg::read_splits_file(splits_path).split_metric();
    } else {
        throw fg::Error("usage", "cluster needs --input or --splits");
    }

    const fg::StyleClusters styles = fg::cluster_styles(*d, k);
    std::string csv = "taxon,cluster\n";
    for (std::size_t t = 0; t < d->size(); ++t)
        csv += d->labels()[t] + "," + std::to_string(styles.assignment[t]) + "\n";
    run.write("clusters.csv", csv);
    run.finish();
    return 0;
}

std::string diagnosis_text(const fg::Diagnosis& diag) {
    std::string out = "delta=" + fmt("%.6f", diag.delta) + "\n";
    out += "tree_fit=" + fmt("%.6f", diag.tree_fit) + "\n";
    out += "seriation_criterion=" + std::to_string(diag.seriation_criterion) + "\n";
    return out;
}

int cmd_simulate(const Common& c, const std::string& mode, std::size_t n_taxa,
                 std::size_t n_traits, double mu, double beta) {
    Run run("simulate", c.out_dir);
    common_params(run, c);
    run.params["mode"] = mode;
    run.params["n_taxa"] = n_taxa;
    run.params["n_traits"] = n_traits;
    run.params["mu"] = mu;
    run.params["beta"] = beta;

    fg::SimConfig cfg;
    cfg.mode = fg::parse_sim_mode(mode);
    cfg.n_taxa = n_taxa;
    cfg.n_traits = n_traits;
    cfg.flip_rate = mu;
    cfg.borrow_rate = beta;
    cfg.seed = c.seed;
    const fg::SimResult r = fg::simulate(cfg);

    run.write("corpus.csv", fg::trait_csv_text(r.matrix));

    std::string truth = "mode=" + mode + "\n";
    truth += "n_taxa=" + std::to_string(n_taxa) + "\n";
    truth += "n_traits=" + std::to_string(n_traits) + "\n";
    truth += "flip_rate=" + fmt("%.6f", mu) + "\n";
    truth += "borrow_rate=" + fmt("%.6f", beta) + "\n";
    truth += "seed=" + std::to_string(c.seed) + "\n";
    truth += "root=" + r.root.to_string() + "\n";
    if (!r.chain_order.empty()) {
        truth += "order";
        for (int id : r.chain_order) truth += " " + r.matrix.taxon(id);
        truth += "\n";
    }
    for (const auto& [parent, child] : r.tree_edges)
        truth += "edge " + r.matrix.taxon(parent) + " " + r.matrix.taxon(child) + "\n";
    for (const auto& b : r.borrow_log)
        truth += "borrow " + std::to_string(b.generation) + " " + r.matrix.taxon(b.lineage) +
                 " " + r.matrix.taxon(b.source) + " " + std::to_string(b.trait) + "\n";
    run.write("truth.txt", truth);

    run.write("diagnosis.txt", diagnosis_text(fg::diagnose(r.matrix, c.seed)));
    run.finish();
    return 0;
}

int cmd_diagnose(const Common& c, const std::string& input) {
    Run run("diagnose", c.out_dir);
    run.input(input);
    common_params(run, c);

    const fg::TraitMatrix m = fg::read_trait_csv(input);
    run.write("diagnosis.txt", diagnosis_text(fg::diagnose(m, c.seed)));
    run.finish();
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"facadegen: genealogy models for binary building-trait matrices"};
    app.require_subcommand(1);

    // ingest
    Common c_ingest;
    std::string ingest_detections, ingest_traits;
    double ingest_tau = 0.5;
    auto* ingest = app.add_subcommand("ingest", "Turn detection records into a trait matrix");
    ingest->add_option("--detections", ingest_detections, "Detection file, one JSON object per line")
        ->required();
    ingest->add_option("--traits", ingest_traits, "Trait catalog file, one name per line")
        ->required();
    ingest->add_option("--tau", ingest_tau, "Confidence threshold for presence")
        ->capture_default_str();
    add_common(ingest, c_ingest);

    // stats
    Common c_stats;
    std::string stats_input;
    auto* stats = app.add_subcommand("stats", "Per-trait frequencies and phi correlations");
    stats->add_option("--input", stats_input, "Trait CSV")->required();
    add_common(stats, c_stats);

    // types
    Common c_types;
    std::string types_input;
    std::size_t types_threshold = 8;
    auto* types = app.add_subcommand("types", "Derive the type catalog from duplicate vectors");
    types->add_option("--input", types_input, "Trait CSV")->required();
    types->add_option("--threshold", types_threshold, "Minimum duplicate count for a type")
        ->capture_default_str();
    add_common(types, c_types);

    // split-dataset
    Common c_split;
    std::string split_input;
    std::size_t split_cutoff = 200;
    std::string split_rare = "70:15:15", split_common = "80:10:10";
    auto* split = app.add_subcommand("split-dataset",
                                     "Frequency-stratified train/validation/test split");
    split->add_option("--input", split_input, "CSV with header instance_id,class")->required();
    split->add_option("--rare-cutoff", split_cutoff, "Class size below which the rare ratio applies")
        ->capture_default_str();
    split->add_option("--rare-ratio", split_rare, "train:validation:test for rare classes")
        ->capture_default_str();
    split->add_option("--common-ratio", split_common, "train:validation:test for common classes")
        ->capture_default_str();
    add_common(split, c_split);

    // seriate
    Common c_seriate;
    std::string seriate_input;
    std::size_t seriate_restarts = 16, seriate_groups = 0;
    auto* seriate = app.add_subcommand("seriate", "Order taxa along a line (battleship plot)");
    seriate->add_option("--input", seriate_input, "Trait CSV")->required();
    seriate->add_option("--restarts", seriate_restarts, "Local-search restarts")
        ->capture_default_str();
    seriate->add_option("--groups", seriate_groups, "Cut the order into this many groups (0 = off)")
        ->capture_default_str();
    add_common(seriate, c_seriate);

    // nj
    Common c_nj;
    std::string nj_input;
    bool nj_clamp = false;
    int nj_precision = 6;
    auto* njcmd = app.add_subcommand("nj", "Neighbor-joining tree, cherries and fit");
    njcmd->add_option("--input", nj_input, "Trait CSV")->required();
    njcmd->add_flag("--clamp-negative", nj_clamp, "Clamp negative branch lengths to zero");
    njcmd->add_option("--precision", nj_precision, "Branch-length decimals in Newick output")
        ->capture_default_str();
    add_common(njcmd, c_nj);

    // nnet
    Common c_nnet;
    std::string nnet_input;
    double nnet_threshold = 1e-6;
    auto* nnet = app.add_subcommand("nnet", "Neighbor-net split network weights");
    nnet->add_option("--input", nnet_input, "Trait CSV")->required();
    nnet->add_option("--threshold", nnet_threshold, "Drop splits below this weight")
        ->capture_default_str();
    add_common(nnet, c_nnet);

    // graph
    Common c_graph;
    std::string graph_splits, graph_labels;
    std::size_t graph_clusters = 0;
    int graph_precision = 6;
    auto* graph = app.add_subcommand("graph", "Realize a split system as a drawable network");
    graph->add_option("--splits", graph_splits, "Splits interchange file")->required();
    graph->add_option("--labels", graph_labels, "Optional taxa label file, one name per line");
    graph->add_option("--clusters", graph_clusters, "Color taxa by this many clusters (0 = off)")
        ->capture_default_str();
    graph->add_option("--precision", graph_precision, "Newick decimals for compatible systems")
        ->capture_default_str();
    add_common(graph, c_graph);

    // cluster
    Common c_cluster;
    std::string cluster_input, cluster_splits;
    std::size_t cluster_k = 4;
    auto* cluster = app.add_subcommand("cluster", "Average-linkage style clusters");
    cluster->add_option("--input", cluster_input, "Trait CSV (uses --metric distances)");
    cluster->add_option("--splits", cluster_splits, "Splits interchange file (uses split metric)");
    cluster->add_option("--k", cluster_k, "Cluster count")->capture_default_str();
    add_common(cluster, c_cluster);

    // simulate
    Common c_sim;
    std::string sim_mode = "tree";
    std::size_t sim_taxa = 25, sim_traits = 14;
    double sim_mu = 0.05, sim_beta = 0.0;
    auto* sim = app.add_subcommand("simulate", "Generate a synthetic corpus with ground truth");
    sim->add_option("--mode", sim_mode, "line, tree or network")->capture_default_str();
    sim->add_option("--n-taxa", sim_taxa, "Sampled taxa")->capture_default_str();
    sim->add_option("--n-traits", sim_traits, "Traits per taxon")->capture_default_str();
    sim->add_option("--mu", sim_mu, "Per-trait flip probability per generation")
        ->capture_default_str();
    sim->add_option("--beta", sim_beta, "Per-taxon borrow probability per generation")
        ->capture_default_str();
    add_common(sim, c_sim);

    // diagnose
    Common c_diag;
    std::string diag_input;
    auto* diag = app.add_subcommand("diagnose", "Delta, tree fit and seriation criterion");
    diag->add_option("--input", diag_input, "Trait CSV")->required();
    add_common(diag, c_diag);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error:usage: " << e.what() << "\n";
        return 2;
    }

    try {
        if (*ingest) return cmd_ingest(c_ingest, ingest_detections, ingest_traits, ingest_tau);
        if (*stats) return cmd_stats(c_stats, stats_input);
        if (*types) return cmd_types(c_types, types_input, types_threshold);
        if (*split)
            return cmd_split_dataset(c_split, split_input, split_cutoff, split_rare, split_common);
        if (*seriate) return cmd_seriate(c_seriate, seriate_input, seriate_restarts, seriate_groups);
        if (*njcmd) return cmd_nj(c_nj, nj_input, nj_clamp, nj_precision);
        if (*nnet) return cmd_nnet(c_nnet, nnet_input, nnet_threshold);
        if (*graph)
            return cmd_graph(c_graph, graph_splits, graph_labels, graph_clusters, graph_precision);
        if (*cluster) return cmd_cluster(c_cluster, cluster_input, cluster_splits, cluster_k);
        if (*sim) return cmd_simulate(c_sim, sim_mode, sim_taxa, sim_traits, sim_mu, sim_beta);
        if (*diag) return cmd_diagnose(c_diag, diag_input);
    } catch (const fg::Error& e) {
        std::cerr << "error:" << e.category() << ": " << e.what() << "\n";
        return e.category() == "usage" ? 2 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error:internal: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
