#include "facadegen/splitsgraph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <numeric>
#include <queue>
#include <sstream>

namespace facadegen {

int SplitsGraph::node_of_taxon(std::size_t taxon) const {
    for (std::size_t v = 0; v < nodes.size(); ++v)
        for (std::size_t t : nodes[v].taxa)
            if (t == taxon) return static_cast<int>(v);
    return -1;
}

namespace {

struct BuildNode {
    std::vector<std::size_t> taxa;
    std::vector<char> state;  // side per inserted split, insertion order
};

struct BuildEdge {
    int a, b;       // a on the taxon-0 side of this edge's split
    int split_id;   // index into the system's split list
    double length;
};

}  // namespace

SplitsGraph build_splits_graph(const SplitSystem& s) {
    s.validate();
    const std::size_t n = s.taxa.size();

    // Decreasing weight; ties by side ordering.
    std::vector<std::size_t> order(s.splits.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (s.splits[a].weight != s.splits[b].weight)
            return s.splits[a].weight > s.splits[b].weight;
        return s.splits[a].side < s.splits[b].side;
    });

    std::vector<BuildNode> nodes(1);
    nodes[0].taxa.resize(n);
    std::iota(nodes[0].taxa.begin(), nodes[0].taxa.end(), 0);
    std::vector<BuildEdge> edges;

    // Taxa states under the inserted splits, in insertion order.
    std::vector<std::vector<char>> taxon_state(n);

    for (std::size_t step = 0; step < order.size(); ++step) {
        const std::size_t split_id = order[step];
        const Split& sp = s.splits[split_id];
        std::vector<char> in_side(n, 0);
        for (std::size_t t : sp.side) in_side[t] = 1;

        // Which state values each side realizes, per inserted split.
        std::vector<char> a_has0(step, 0), a_has1(step, 0), b_has0(step, 0), b_has1(step, 0);
        for (std::size_t t = 0; t < n; ++t) {
            for (std::size_t j = 0; j < step; ++j) {
                if (in_side[t])
                    (taxon_state[t][j] ? a_has1[j] : a_has0[j]) = 1;
                else
                    (taxon_state[t][j] ? b_has1[j] : b_has0[j]) = 1;
            }
        }

        const std::size_t v_count = nodes.size();
        std::vector<char> in_hull_a(v_count, 1), in_hull_b(v_count, 1);
        for (std::size_t v = 0; v < v_count; ++v) {
            for (std::size_t j = 0; j < step; ++j) {
                const char bit = nodes[v].state[j];
                if (!(bit ? a_has1[j] : a_has0[j])) in_hull_a[v] = 0;
                if (!(bit ? b_has1[j] : b_has0[j])) in_hull_b[v] = 0;
            }
            if (!in_hull_a[v] && !in_hull_b[v])
                throw Error("validation", "split system is not realizable as a graph");
        }

        // Duplicate the hull intersection; copies carry the new split's side.
        std::vector<int> dup(v_count, -1);
        for (std::size_t v = 0; v < v_count; ++v) {
            if (!(in_hull_a[v] && in_hull_b[v])) continue;
            BuildNode copy;
            copy.state = nodes[v].state;
            copy.state.push_back(1);
            for (std::size_t t : nodes[v].taxa)
                if (in_side[t]) copy.taxa.push_back(t);
            std::erase_if(nodes[v].taxa, [&](std::size_t t) { return in_side[t] != 0; });
            dup[v] = static_cast<int>(nodes.size());
            nodes.push_back(std::move(copy));
        }
        for (std::size_t v = 0; v < v_count; ++v) {
            if (dup[v] != -1)
                nodes[v].state.push_back(0);
            else
                nodes[v].state.push_back(in_hull_a[v] ? 1 : 0);
        }
        for (std::size_t t = 0; t < n; ++t) taxon_state[t].push_back(in_side[t]);

        std::vector<BuildEdge> grown;
        grown.reserve(edges.size() * 2);
        for (const BuildEdge& e : edges) {
            const bool da = dup[e.a] != -1, db = dup[e.b] != -1;
            if (da && db) {
                grown.push_back(e);
                grown.push_back({dup[e.a], dup[e.b], e.split_id, e.length});
            } else if (da) {
                // Reattach toward the copy when the other endpoint sits
                // strictly on the new split's side.
                if (nodes[e.b].state.back())
                    grown.push_back({dup[e.a], e.b, e.split_id, e.length});
                else
                    grown.push_back(e);
            } else if (db) {
                if (nodes[e.a].state.back())
                    grown.push_back({e.a, dup[e.b], e.split_id, e.length});
                else
                    grown.push_back(e);
            } else {
                grown.push_back(e);
            }
        }
        for (std::size_t v = 0; v < v_count; ++v)
            if (dup[v] != -1)
                grown.push_back({static_cast<int>(v), dup[v],
                                 static_cast<int>(split_id), sp.weight});
        edges = std::move(grown);
    }

    SplitsGraph g;
    g.taxa_labels = s.taxa;
    g.nodes.resize(nodes.size());
    for (std::size_t v = 0; v < nodes.size(); ++v) g.nodes[v].taxa = nodes[v].taxa;
    g.edges.reserve(edges.size());
    for (const BuildEdge& e : edges)
        g.edges.push_back({e.a, e.b, e.split_id, e.length});
    return g;
}

DistanceMatrix graph_distance_matrix(const SplitsGraph& g) {
    const std::size_t n = g.taxa_labels.size();
    std::vector<int> taxon_node(n);
    for (std::size_t t = 0; t < n; ++t) {
        taxon_node[t] = g.node_of_taxon(t);
        if (taxon_node[t] < 0) throw Error("validation", "taxon missing from graph");
    }
    std::vector<std::vector<std::pair<int, double>>> adj(g.nodes.size());
    for (const auto& e : g.edges) {
        adj[e.a].emplace_back(e.b, e.length);
        adj[e.b].emplace_back(e.a, e.length);
    }
    std::vector<double> out(n * n, 0.0);
    for (std::size_t t = 0; t < n; ++t) {
        std::vector<double> dist(g.nodes.size(), std::numeric_limits<double>::infinity());
        using Item = std::pair<double, int>;
        std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
        dist[taxon_node[t]] = 0.0;
        pq.emplace(0.0, taxon_node[t]);
        while (!pq.empty()) {
            const auto [dv, v] = pq.top();
            pq.pop();
            if (dv > dist[v]) continue;
            for (const auto& [u, len] : adj[v]) {
                const double cand = dv + len;
                if (cand < dist[u]) {
                    dist[u] = cand;
                    pq.emplace(cand, u);
                }
            }
        }
        for (std::size_t o = 0; o < n; ++o)
            if (o != t) out[t * n + o] = dist[taxon_node[o]];
    }
    // Exact symmetry for the constructor.
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) out[j * n + i] = out[i * n + j];
    return DistanceMatrix(g.taxa_labels, std::move(out));
}

double verify_graph_metric(const SplitsGraph& g, const SplitSystem& s) {
    const DistanceMatrix by_graph = graph_distance_matrix(g);
    const DistanceMatrix by_splits = s.split_metric();
    double worst = 0.0;
    for (std::size_t i = 0; i < by_graph.size(); ++i)
        for (std::size_t j = i + 1; j < by_graph.size(); ++j)
            worst = std::max(worst, std::abs(by_graph.at(i, j) - by_splits.at(i, j)));
    return worst;
}

void equal_angle_layout(SplitsGraph& g, const SplitSystem& s) {
    const std::size_t n = s.taxa.size();
    std::vector<std::size_t> pos(n);
    for (std::size_t p = 0; p < n; ++p) pos[s.ordering.cycle()[p]] = p;

    // One direction per split: the middle angle of its arc.
    std::vector<double> vx(s.splits.size()), vy(s.splits.size());
    for (std::size_t i = 0; i < s.splits.size(); ++i) {
        std::size_t lo = n, hi = 0;
        for (std::size_t t : s.splits[i].side) {
            lo = std::min(lo, pos[t]);
            hi = std::max(hi, pos[t]);
        }
        const double angle = std::numbers::pi *
                             (static_cast<double>(lo) + static_cast<double>(hi)) /
                             static_cast<double>(n);
        vx[i] = s.splits[i].weight * std::cos(angle);
        vy[i] = s.splits[i].weight * std::sin(angle);
    }

    std::vector<std::vector<std::pair<int, int>>> adj(g.nodes.size());  // (edge, peer)
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
        adj[g.edges[e].a].emplace_back(static_cast<int>(e), g.edges[e].b);
        adj[g.edges[e].b].emplace_back(static_cast<int>(e), g.edges[e].a);
    }
    const int origin = g.edges.empty() ? 0 : g.node_of_taxon(0);
    std::vector<char> placed(g.nodes.size(), 0);
    std::vector<int> stack{origin};
    g.nodes[origin].x = 0.0;
    g.nodes[origin].y = 0.0;
    placed[origin] = 1;
    while (!stack.empty()) {
        const int v = stack.back();
        stack.pop_back();
        for (const auto& [ei, u] : adj[v]) {
            if (placed[u]) continue;
            const auto& e = g.edges[ei];
            const double sign = (e.a == v) ? 1.0 : -1.0;  // edge.a sits on taxon 0's side
            g.nodes[u].x = g.nodes[v].x + sign * vx[e.split_id];
            g.nodes[u].y = g.nodes[v].y + sign * vy[e.split_id];
            placed[u] = 1;
            stack.push_back(u);
        }
    }
    g.has_layout = true;
}

StyleClusters cluster_styles(const DistanceMatrix& d, std::size_t k) {
    const std::size_t n = d.size();
    if (k < 1 || k > n) throw Error("validation", "cluster count must be in [1, taxa count]");

    // Slot = smallest member index; merges land in the lower slot.
    std::vector<char> active(n, 1);
    std::vector<std::size_t> size(n, 1);
    std::vector<std::vector<std::size_t>> members(n);
    for (std::size_t i = 0; i < n; ++i) members[i] = {i};
    std::vector<double> w(d.values());

    std::size_t remaining = n;
    while (remaining > k) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t bi = 0, bj = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (!active[i]) continue;
            for (std::size_t j = i + 1; j < n; ++j) {
                if (!active[j]) continue;
                if (w[i * n + j] < best) {
                    best = w[i * n + j];
                    bi = i;
                    bj = j;
                }
            }
        }
        for (std::size_t x = 0; x < n; ++x) {
            if (!active[x] || x == bi || x == bj) continue;
            const double merged =
                (static_cast<double>(size[bi]) * w[bi * n + x] +
                 static_cast<double>(size[bj]) * w[bj * n + x]) /
                static_cast<double>(size[bi] + size[bj]);
            w[bi * n + x] = w[x * n + bi] = merged;
        }
        size[bi] += size[bj];
        members[bi].insert(members[bi].end(), members[bj].begin(), members[bj].end());
        active[bj] = 0;
        --remaining;
    }

    StyleClusters out;
    out.k = k;
    out.method = "average-linkage";
    out.assignment.assign(n, 0);
    int next_id = 1;
    for (std::size_t i = 0; i < n; ++i) {
        if (!active[i]) continue;
        for (std::size_t t : members[i]) out.assignment[t] = next_id;
        ++next_id;
    }
    return out;
}

namespace {

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

}  // namespace

std::string write_splits_text(const SplitSystem& s) {
    std::string out = "#SPLITS\n";
    out += "ntax=" + std::to_string(s.taxa.size()) + "\n";
    out += "nsplits=" + std::to_string(s.splits.size()) + "\n";
    out += "cycle=";
    for (std::size_t p = 0; p < s.ordering.size(); ++p) {
        if (p) out += ' ';
        out += std::to_string(s.ordering.cycle()[p] + 1);
    }
    out += '\n';
    for (const auto& sp : s.splits) {
        out += format_double(sp.weight);
        out += ' ';
        for (std::size_t i = 0; i < sp.side.size(); ++i) {
            if (i) out += ',';
            out += std::to_string(sp.side[i] + 1);
        }
        out += '\n';
    }
    return out;
}

SplitSystem read_splits_text(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    auto next_line = [&]() {
        if (!std::getline(in, line))
            throw Error("parse", "splits:" + std::to_string(line_no + 1) + ": unexpected end");
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
    };
    auto fail = [&](const std::string& what) -> void {
        throw Error("parse", "splits:" + std::to_string(line_no) + ": " + what);
    };

    next_line();
    if (line != "#SPLITS") fail("expected '#SPLITS' header");
    next_line();
    if (line.rfind("ntax=", 0) != 0) fail("expected ntax=");
    const std::size_t n = std::stoul(line.substr(5));
    next_line();
    if (line.rfind("nsplits=", 0) != 0) fail("expected nsplits=");
    const std::size_t m = std::stoul(line.substr(8));
    next_line();
    if (line.rfind("cycle=", 0) != 0) fail("expected cycle=");
    std::istringstream cyc(line.substr(6));
    std::vector<std::size_t> cycle;
    std::size_t v;
    while (cyc >> v) {
        if (v < 1 || v > n) fail("cycle index out of range");
        cycle.push_back(v - 1);
    }
    if (cycle.size() != n) fail("cycle does not list every taxon");

    SplitSystem s;
    s.taxa.resize(n);
    for (std::size_t i = 0; i < n; ++i) s.taxa[i] = "t" + std::to_string(i + 1);
    s.ordering = CircularOrdering(cycle);
    for (std::size_t i = 0; i < m; ++i) {
        next_line();
        const auto space = line.find(' ');
        if (space == std::string::npos) fail("expected '<weight> <members>'");
        Split sp;
        try {
            sp.weight = std::stod(line.substr(0, space));
        } catch (const std::exception&) {
            fail("invalid weight");
        }
        std::string members = line.substr(space + 1);
        std::istringstream ms(members);
        std::string tok;
        while (std::getline(ms, tok, ',')) {
            std::size_t idx = 0;
            try {
                idx = std::stoul(tok);
            } catch (const std::exception&) {
                fail("invalid member index");
            }
            if (idx < 1 || idx > n) fail("member index out of range");
            sp.side.push_back(idx - 1);
        }
        std::sort(sp.side.begin(), sp.side.end());
        s.splits.push_back(std::move(sp));
    }
    s.validate();
    return s;
}

SplitSystem read_splits_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("io", "cannot read file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return read_splits_text(ss.str());
}

bool splits_compatible_system(const SplitSystem& s) {
    for (std::size_t i = 0; i < s.splits.size(); ++i)
        for (std::size_t j = i + 1; j < s.splits.size(); ++j)
            if (!splits_compatible(s.splits[i], s.splits[j], s.taxa.size())) return false;
    return true;
}

PhyloTree splits_tree(const SplitSystem& s) {
    if (!splits_compatible_system(s))
        throw Error("validation", "split system is not tree-compatible");
    const SplitsGraph g = build_splits_graph(s);

    PhyloTree t;
    std::vector<std::size_t> degree(g.nodes.size(), 0);
    for (const auto& e : g.edges) {
        ++degree[e.a];
        ++degree[e.b];
    }
    std::vector<int> map(g.nodes.size());
    for (std::size_t v = 0; v < g.nodes.size(); ++v) {
        if (g.nodes[v].taxa.size() == 1 && degree[v] == 1)
            map[v] = t.add_node(g.taxa_labels[g.nodes[v].taxa[0]]);
        else
            map[v] = t.add_node();
    }
    for (const auto& e : g.edges) t.add_edge(map[e.a], map[e.b], e.length);
    for (std::size_t v = 0; v < g.nodes.size(); ++v) {
        if (g.nodes[v].taxa.size() == 1 && degree[v] == 1) continue;
        for (std::size_t taxon : g.nodes[v].taxa)
            t.add_edge(map[v], t.add_node(g.taxa_labels[taxon]), 0.0);
    }

    // Suppress unlabeled degree-2 nodes left by missing splits.
    bool again = true;
    while (again) {
        again = false;
        for (std::size_t v = 0; v < t.nodes().size(); ++v) {
            if (t.nodes()[v].is_leaf() || t.nodes()[v].edges.size() != 2) continue;
            const int e1 = t.nodes()[v].edges[0];
            const int e2 = t.nodes()[v].edges[1];
            const int a = t.neighbor(static_cast<int>(v), e1);
            const int b = t.neighbor(static_cast<int>(v), e2);
            const double len = t.edges()[e1].length + t.edges()[e2].length;
            PhyloTree rebuilt;
            std::vector<int> remap(t.nodes().size(), -1);
            for (std::size_t i = 0; i < t.nodes().size(); ++i)
                if (i != v) remap[i] = rebuilt.add_node(t.nodes()[i].label);
            for (std::size_t e = 0; e < t.edges().size(); ++e) {
                if (static_cast<int>(e) == e1 || static_cast<int>(e) == e2) continue;
                rebuilt.add_edge(remap[t.edges()[e].a], remap[t.edges()[e].b],
                                 t.edges()[e].length);
            }
            rebuilt.add_edge(remap[a], remap[b], len);
            t = std::move(rebuilt);
            again = true;
            break;
        }
    }
    for (std::size_t v = t.nodes().size(); v-- > 0;) {
        if (!t.nodes()[v].is_leaf()) {
            t.serial_root = static_cast<int>(v);
            break;
        }
    }
    t.validate();
    return t;
}

std::string to_dot(const SplitsGraph& g) {
    std::string out = "graph splits {\n";
    for (std::size_t v = 0; v < g.nodes.size(); ++v) {
        out += "  n" + std::to_string(v);
        if (!g.nodes[v].taxa.empty()) {
            out += " [label=\"";
            for (std::size_t i = 0; i < g.nodes[v].taxa.size(); ++i) {
                if (i) out += '+';
                out += g.taxa_labels[g.nodes[v].taxa[i]];
            }
            out += "\"]";
        } else {
            out += " [label=\"\"]";
        }
        out += ";\n";
    }
    for (const auto& e : g.edges) {
        out += "  n" + std::to_string(e.a) + " -- n" + std::to_string(e.b) + " [split=" +
               std::to_string(e.split_id) + ", len=" + format_double(e.length) + "];\n";
    }
    out += "}\n";
    return out;
}

std::string to_svg(const SplitsGraph& g, const StyleClusters* clusters) {
    static const char* kPalette[] = {"#4477aa", "#ee6677", "#228833", "#ccbb44",
                                     "#66ccee", "#aa3377", "#bbbbbb", "#222255",
                                     "#997700", "#cc3311", "#009988", "#ee3377"};
    const std::size_t n_colors = sizeof kPalette / sizeof kPalette[0];

    double min_x = 0, max_x = 0, min_y = 0, max_y = 0;
    for (const auto& v : g.nodes) {
        min_x = std::min(min_x, v.x);
        max_x = std::max(max_x, v.x);
        min_y = std::min(min_y, v.y);
        max_y = std::max(max_y, v.y);
    }
    const double span = std::max({max_x - min_x, max_y - min_y, 1e-9});
    const double scale = 520.0 / span;
    const double margin = 60.0;
    auto px = [&](double x) { return (x - min_x) * scale + margin; };
    auto py = [&](double y) { return (y - min_y) * scale + margin; };
    auto fmt = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.2f", v);
        return std::string(buf);
    };

    const double width = (max_x - min_x) * scale + 2 * margin;
    const double height = (max_y - min_y) * scale + 2 * margin;
    std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(width) +
                      "\" height=\"" + fmt(height) + "\">\n";
    for (const auto& e : g.edges) {
        out += "  <line x1=\"" + fmt(px(g.nodes[e.a].x)) + "\" y1=\"" + fmt(py(g.nodes[e.a].y)) +
               "\" x2=\"" + fmt(px(g.nodes[e.b].x)) + "\" y2=\"" + fmt(py(g.nodes[e.b].y)) +
               "\" stroke=\"#555555\" stroke-width=\"1.5\"/>\n";
    }
    for (std::size_t v = 0; v < g.nodes.size(); ++v) {
        for (std::size_t taxon : g.nodes[v].taxa) {
            const char* color = "#333333";
            if (clusters && taxon < clusters->assignment.size() &&
                clusters->assignment[taxon] > 0)
                color = kPalette[(static_cast<std::size_t>(clusters->assignment[taxon]) - 1) %
                                 n_colors];
            out += "  <circle cx=\"" + fmt(px(g.nodes[v].x)) + "\" cy=\"" +
                   fmt(py(g.nodes[v].y)) + "\" r=\"4\" fill=\"" + color + "\"/>\n";
            out += "  <text x=\"" + fmt(px(g.nodes[v].x) + 6) + "\" y=\"" +
                   fmt(py(g.nodes[v].y) - 6) + "\" font-size=\"11\" fill=\"" + color + "\">" +
                   g.taxa_labels[taxon] + "</text>\n";
        }
    }
    out += "</svg>\n";
    return out;
}

}  // namespace facadegen
