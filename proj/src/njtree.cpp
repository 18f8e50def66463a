#include "facadegen/njtree.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <set>

namespace facadegen {

int PhyloTree::add_node(std::string label) {
    nodes_.push_back(Node{std::move(label), {}});
    return static_cast<int>(nodes_.size()) - 1;
}

int PhyloTree::add_edge(int a, int b, double length) {
    const int id = static_cast<int>(edges_.size());
    edges_.push_back(Edge{a, b, length});
    nodes_.at(a).edges.push_back(id);
    nodes_.at(b).edges.push_back(id);
    return id;
}

int PhyloTree::neighbor(int node, int edge) const {
    const Edge& e = edges_.at(edge);
    return e.a == node ? e.b : e.a;
}

std::vector<int> PhyloTree::leaf_nodes() const {
    std::vector<int> out;
    for (std::size_t i = 0; i < nodes_.size(); ++i)
        if (nodes_[i].is_leaf()) out.push_back(static_cast<int>(i));
    return out;
}

std::size_t PhyloTree::leaf_count() const { return leaf_nodes().size(); }

void PhyloTree::validate() const {
    if (nodes_.empty()) throw Error("validation", "tree has no nodes");
    if (edges_.size() + 1 != nodes_.size())
        throw Error("validation", "tree edge count must be node count - 1");
    std::set<std::string> labels;
    for (const auto& n : nodes_) {
        if (n.is_leaf()) {
            if (!labels.insert(n.label).second)
                throw Error("validation", "duplicate leaf label '" + n.label + "'");
        } else if (nodes_.size() > 1 && n.edges.size() < 3) {
            throw Error("validation", "internal node of degree < 3");
        }
    }
    for (const auto& e : edges_)
        if (!std::isfinite(e.length)) throw Error("validation", "branch length must be finite");
    // Connectivity by traversal.
    std::vector<bool> seen(nodes_.size(), false);
    std::vector<int> stack{0};
    seen[0] = true;
    std::size_t count = 1;
    while (!stack.empty()) {
        const int v = stack.back();
        stack.pop_back();
        for (int e : nodes_[v].edges) {
            const int u = neighbor(v, e);
            if (!seen[u]) {
                seen[u] = true;
                ++count;
                stack.push_back(u);
            }
        }
    }
    if (count != nodes_.size()) throw Error("validation", "tree is not connected");
}

PhyloTree nj(const DistanceMatrix& d, bool clamp_negative) {
    const std::size_t n = d.size();
    if (n < 2) throw Error("size", "neighbor joining requires at least 2 taxa");

    PhyloTree t;
    for (std::size_t i = 0; i < n; ++i) t.add_node(d.labels()[i]);

    auto clamp_pair = [&](double& x, double& y) {
        if (!clamp_negative) return;
        if (x < 0.0) { y += x; x = 0.0; }
        if (y < 0.0) { x += y; y = 0.0; }
        if (x < 0.0) x = 0.0;
    };

    if (n == 2) {
        t.add_edge(0, 1, d.at(0, 1));
        return t;
    }

    // Working copy of the distances; `active` maps slots to tree node ids.
    std::size_t cap = 2 * n;
    std::vector<double> w(cap * cap, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) w[i * cap + j] = d.at(i, j);
    std::vector<std::size_t> active(n);
    for (std::size_t i = 0; i < n; ++i) active[i] = i;
    std::size_t next_slot = n;

    while (active.size() > 3) {
        const std::size_t na = active.size();
        std::vector<double> rowsum(na, 0.0);
        for (std::size_t i = 0; i < na; ++i)
            for (std::size_t j = 0; j < na; ++j)
                rowsum[i] += w[active[i] * cap + active[j]];

        double best_q = std::numeric_limits<double>::infinity();
        std::size_t bi = 0, bj = 1;
        for (std::size_t i = 0; i < na; ++i) {
            for (std::size_t j = i + 1; j < na; ++j) {
                const double q = (static_cast<double>(na) - 2.0) * w[active[i] * cap + active[j]] -
                                 rowsum[i] - rowsum[j];
                if (q < best_q) {
                    best_q = q;
                    bi = i;
                    bj = j;
                }
            }
        }

        const std::size_t si = active[bi], sj = active[bj];
        const double dij = w[si * cap + sj];
        double li = 0.5 * dij + (rowsum[bi] - rowsum[bj]) / (2.0 * (static_cast<double>(na) - 2.0));
        double lj = dij - li;
        clamp_pair(li, lj);

        const int u = t.add_node();
        t.add_edge(u, static_cast<int>(si), li);
        t.add_edge(u, static_cast<int>(sj), lj);

        const std::size_t su = next_slot++;
        for (std::size_t k = 0; k < na; ++k) {
            if (k == bi || k == bj) continue;
            const std::size_t sk = active[k];
            const double v = 0.5 * (w[si * cap + sk] + w[sj * cap + sk] - dij);
            w[su * cap + sk] = v;
            w[sk * cap + su] = v;
        }
        active.erase(active.begin() + bj);
        active.erase(active.begin() + bi);
        active.push_back(su);
    }

    // Final three-point join.
    const std::size_t a = active[0], b = active[1], c = active[2];
    double va = 0.5 * (w[a * cap + b] + w[a * cap + c] - w[b * cap + c]);
    double vb = 0.5 * (w[a * cap + b] + w[b * cap + c] - w[a * cap + c]);
    double vc = 0.5 * (w[a * cap + c] + w[b * cap + c] - w[a * cap + b]);
    if (clamp_negative) {
        if (va < 0.0) va = 0.0;
        if (vb < 0.0) vb = 0.0;
        if (vc < 0.0) vc = 0.0;
    }
    const int center = t.add_node();
    t.add_edge(center, static_cast<int>(a), va);
    t.add_edge(center, static_cast<int>(b), vb);
    t.add_edge(center, static_cast<int>(c), vc);
    t.serial_root = center;
    return t;
}

DistanceMatrix tree_distance_matrix(const PhyloTree& t) {
    std::vector<int> leaves = t.leaf_nodes();
    std::sort(leaves.begin(), leaves.end(), [&](int x, int y) {
        return t.nodes()[x].label < t.nodes()[y].label;
    });
    const std::size_t n = leaves.size();
    std::vector<std::string> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = t.nodes()[leaves[i]].label;

    std::vector<double> out(n * n, 0.0);
    std::vector<double> dist(t.nodes().size());
    for (std::size_t i = 0; i < n; ++i) {
        std::fill(dist.begin(), dist.end(), std::numeric_limits<double>::quiet_NaN());
        dist[leaves[i]] = 0.0;
        std::vector<int> stack{leaves[i]};
        while (!stack.empty()) {
            const int v = stack.back();
            stack.pop_back();
            for (int e : t.nodes()[v].edges) {
                const int u = t.neighbor(v, e);
                if (std::isnan(dist[u])) {
                    dist[u] = dist[v] + t.edges()[e].length;
                    stack.push_back(u);
                }
            }
        }
        for (std::size_t j = 0; j < n; ++j) out[i * n + j] = (i == j) ? 0.0 : dist[leaves[j]];
    }
    // Symmetrize exactly; both directions sum the same edges.
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) out[j * n + i] = out[i * n + j];
    return DistanceMatrix(std::move(labels), std::move(out));
}

std::vector<std::pair<std::string, std::string>> cherries(const PhyloTree& t) {
    std::vector<std::pair<std::string, std::string>> out;
    for (std::size_t v = 0; v < t.nodes().size(); ++v) {
        if (t.nodes()[v].is_leaf()) continue;
        std::vector<std::string> leaf_nbrs;
        for (int e : t.nodes()[v].edges) {
            const int u = t.neighbor(static_cast<int>(v), e);
            if (t.nodes()[u].is_leaf()) leaf_nbrs.push_back(t.nodes()[u].label);
        }
        std::sort(leaf_nbrs.begin(), leaf_nbrs.end());
        for (std::size_t i = 0; i < leaf_nbrs.size(); ++i)
            for (std::size_t j = i + 1; j < leaf_nbrs.size(); ++j)
                out.emplace_back(leaf_nbrs[i], leaf_nbrs[j]);
    }
    std::sort(out.begin(), out.end());
    return out;
}

double ls_fit(const DistanceMatrix& d, const DistanceMatrix& model) {
    if (d.size() != model.size()) throw Error("dimension", "distance matrices differ in size");
    // Match labels by name; order may differ.
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < model.size(); ++i) index[model.labels()[i]] = i;
    std::vector<std::size_t> map(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        auto it = index.find(d.labels()[i]);
        if (it == index.end())
            throw Error("validation", "label '" + d.labels()[i] + "' missing from model matrix");
        map[i] = it->second;
    }
    double ss_d = 0.0, ss_res = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        for (std::size_t j = i + 1; j < d.size(); ++j) {
            const double obs = d.at(i, j);
            const double fit = model.at(map[i], map[j]);
            ss_d += obs * obs;
            ss_res += (obs - fit) * (obs - fit);
        }
    }
    if (ss_d == 0.0)
        return ss_res == 0.0 ? 100.0 : -std::numeric_limits<double>::infinity();
    return 100.0 * (1.0 - ss_res / ss_d);
}

namespace {

std::string format_length(double v, int precision) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", precision, v);
    return buf;
}

std::string quote_label(const std::string& label) {
    const bool needs_quote =
        label.find_first_of(" \t\n()[]{}:;,'\"") != std::string::npos;
    if (!needs_quote) return label;
    std::string out = "'";
    for (char c : label) {
        out += c;
        if (c == '\'') out += '\'';
    }
    out += '\'';
    return out;
}

void write_subtree(const PhyloTree& t, int node, int from_edge, int precision,
                   std::string& out) {
    const auto& nd = t.nodes()[node];
    if (nd.is_leaf()) {
        out += quote_label(nd.label);
        return;
    }
    out += '(';
    bool first = true;
    for (int e : nd.edges) {
        if (e == from_edge) continue;
        if (!first) out += ',';
        first = false;
        write_subtree(t, t.neighbor(node, e), e, precision, out);
        out += ':';
        out += format_length(t.edges()[e].length, precision);
    }
    out += ')';
}

}  // namespace

std::string to_newick(const PhyloTree& t, int precision) {
    if (t.nodes().size() == 2) {
        // Single edge: split at the midpoint for serialization.
        const double half = t.edges()[0].length / 2.0;
        std::string out = "(";
        out += quote_label(t.nodes()[0].label);
        out += ':';
        out += format_length(half, precision);
        out += ',';
        out += quote_label(t.nodes()[1].label);
        out += ':';
        out += format_length(half, precision);
        out += ");";
        return out;
    }
    int root = t.serial_root;
    if (root < 0) {
        for (std::size_t i = t.nodes().size(); i-- > 0;)
            if (!t.nodes()[i].is_leaf()) {
                root = static_cast<int>(i);
                break;
            }
    }
    if (root < 0) throw Error("validation", "tree has no internal node to serialize from");
    std::string out;
    write_subtree(t, root, -1, precision, out);
    out += ';';
    return out;
}

namespace {

struct NewickParser {
    const std::string& text;
    std::size_t pos = 0;
    PhyloTree tree;

    explicit NewickParser(const std::string& s) : text(s) {}

    [[noreturn]] void fail(const std::string& what) {
        throw Error("parse", "newick: " + what + " at offset " + std::to_string(pos));
    }

    char peek() {
        if (pos >= text.size()) fail("unexpected end of input");
        return text[pos];
    }

    void skip_space() {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    }

    std::string parse_label() {
        skip_space();
        std::string out;
        if (peek() == '\'') {
            ++pos;
            while (true) {
                if (pos >= text.size()) fail("unterminated quoted label");
                const char c = text[pos++];
                if (c == '\'') {
                    if (pos < text.size() && text[pos] == '\'') {
                        out += '\'';
                        ++pos;
                    } else {
                        break;
                    }
                } else {
                    out += c;
                }
            }
        } else {
            while (pos < text.size() &&
                   std::string("(),:;[]' \t\n").find(text[pos]) == std::string::npos)
                out += text[pos++];
        }
        return out;
    }

    double parse_length() {
        skip_space();
        std::size_t consumed = 0;
        double v = 0.0;
        try {
            v = std::stod(text.substr(pos), &consumed);
        } catch (const std::exception&) {
            fail("invalid branch length");
        }
        pos += consumed;
        return v;
    }

    // Returns the node id of the parsed subtree.
    int parse_subtree() {
        skip_space();
        if (peek() == '(') {
            ++pos;
            const int node = tree.add_node();
            while (true) {
                const int child = parse_subtree();
                skip_space();
                double length = 0.0;
                if (peek() == ':') {
                    ++pos;
                    length = parse_length();
                }
                tree.add_edge(node, child, length);
                skip_space();
                if (peek() == ',') {
                    ++pos;
                    continue;
                }
                if (peek() == ')') {
                    ++pos;
                    break;
                }
                fail("expected ',' or ')'");
            }
            skip_space();
            // Internal labels are accepted and dropped.
            if (pos < text.size() && text[pos] != ':' && text[pos] != ';' && text[pos] != ',' &&
                text[pos] != ')')
                parse_label();
            return node;
        }
        const std::string label = parse_label();
        if (label.empty()) fail("expected a leaf label");
        return tree.add_node(label);
    }
};

}  // namespace

PhyloTree parse_newick(const std::string& text) {
    NewickParser p(text);
    const int root = p.parse_subtree();
    p.skip_space();
    if (p.pos >= text.size() || text[p.pos] != ';') p.fail("expected ';'");

    PhyloTree& t = p.tree;
    t.serial_root = root;
    if (!t.nodes()[root].is_leaf() && t.nodes()[root].edges.size() == 2) {
        // Suppress the degree-2 serialization root.
        const int e1 = t.nodes()[root].edges[0];
        const int e2 = t.nodes()[root].edges[1];
        const int a = t.neighbor(root, e1);
        const int b = t.neighbor(root, e2);
        const double len = t.edges()[e1].length + t.edges()[e2].length;
        PhyloTree rebuilt;
        std::vector<int> remap(t.nodes().size(), -1);
        for (std::size_t i = 0; i < t.nodes().size(); ++i) {
            if (static_cast<int>(i) == root) continue;
            remap[i] = rebuilt.add_node(t.nodes()[i].label);
        }
        for (std::size_t e = 0; e < t.edges().size(); ++e) {
            if (static_cast<int>(e) == e1 || static_cast<int>(e) == e2) continue;
            const auto& edge = t.edges()[e];
            rebuilt.add_edge(remap[edge.a], remap[edge.b], edge.length);
        }
        rebuilt.add_edge(remap[a], remap[b], len);
        rebuilt.serial_root = !rebuilt.nodes()[remap[a]].is_leaf()   ? remap[a]
                              : !rebuilt.nodes()[remap[b]].is_leaf() ? remap[b]
                                                                     : -1;
        rebuilt.validate();
        return rebuilt;
    }
    t.validate();
    return t;
}

}  // namespace facadegen
