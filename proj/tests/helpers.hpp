#pragma once

// Shared test fixtures: random trees with oracle path-sum metrics, split
// extraction, and random circular split systems with an independent metric
// evaluator. Everything here is computed straight from definitions so the
// library code under test never feeds its own oracle.

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "facadegen/core.hpp"
#include "facadegen/njtree.hpp"
#include "facadegen/random.hpp"

namespace testfix {

// Canonical bipartition key: the sorted side that excludes the overall
// smallest label.
using SplitKey = std::vector<std::string>;

inline SplitKey canonical_key(std::vector<std::string> side,
                              const std::vector<std::string>& all) {
    std::sort(side.begin(), side.end());
    const std::string& smallest = *std::min_element(all.begin(), all.end());
    if (std::binary_search(side.begin(), side.end(), smallest)) {
        SplitKey other;
        for (const auto& l : all)
            if (!std::binary_search(side.begin(), side.end(), l)) other.push_back(l);
        std::sort(other.begin(), other.end());
        return other;
    }
    return side;
}

// Plain undirected tree built leaf by leaf; the metric and splits are read
// straight off the structure.
struct TestTree {
    struct Edge {
        int a, b;
        double length;
    };
    std::vector<std::string> node_labels;  // empty for internal nodes
    std::vector<Edge> edges;

    int add_node(std::string label = {}) {
        node_labels.push_back(std::move(label));
        return static_cast<int>(node_labels.size()) - 1;
    }

    std::vector<std::string> leaf_labels() const {
        std::vector<std::string> out;
        for (const auto& l : node_labels)
            if (!l.empty()) out.push_back(l);
        std::sort(out.begin(), out.end());
        return out;
    }

    facadegen::DistanceMatrix metric() const {
        const std::size_t nn = node_labels.size();
        std::vector<std::vector<std::pair<int, double>>> adj(nn);
        for (const auto& e : edges) {
            adj[e.a].emplace_back(e.b, e.length);
            adj[e.b].emplace_back(e.a, e.length);
        }
        std::vector<int> leaves;
        for (std::size_t v = 0; v < nn; ++v)
            if (!node_labels[v].empty()) leaves.push_back(static_cast<int>(v));
        std::sort(leaves.begin(), leaves.end(),
                  [&](int x, int y) { return node_labels[x] < node_labels[y]; });
        const std::size_t n = leaves.size();
        std::vector<std::string> labels(n);
        for (std::size_t i = 0; i < n; ++i) labels[i] = node_labels[leaves[i]];
        std::vector<double> d(n * n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<double> dist(nn, -1.0);
            std::vector<int> stack{leaves[i]};
            dist[leaves[i]] = 0.0;
            while (!stack.empty()) {
                const int v = stack.back();
                stack.pop_back();
                for (const auto& [u, len] : adj[v]) {
                    if (dist[u] >= 0.0) continue;
                    dist[u] = dist[v] + len;
                    stack.push_back(u);
                }
            }
            for (std::size_t j = 0; j < n; ++j)
                if (i != j) d[i * n + j] = dist[leaves[j]];
        }
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) d[j * n + i] = d[i * n + j];
        return facadegen::DistanceMatrix(labels, d);
    }

    // Bipartition -> branch length, one entry per edge with both sides
    // holding at least one leaf... for binary trees with labeled leaves this
    // is every edge.
    std::map<SplitKey, double> splits() const {
        const auto all = leaf_labels();
        const std::size_t nn = node_labels.size();
        std::map<SplitKey, double> out;
        for (std::size_t cut = 0; cut < edges.size(); ++cut) {
            std::vector<std::vector<int>> adj(nn);
            for (std::size_t e = 0; e < edges.size(); ++e) {
                if (e == cut) continue;
                adj[edges[e].a].push_back(edges[e].b);
                adj[edges[e].b].push_back(edges[e].a);
            }
            std::vector<char> seen(nn, 0);
            std::vector<int> stack{edges[cut].a};
            seen[edges[cut].a] = 1;
            while (!stack.empty()) {
                const int v = stack.back();
                stack.pop_back();
                for (int u : adj[v])
                    if (!seen[u]) {
                        seen[u] = 1;
                        stack.push_back(u);
                    }
            }
            std::vector<std::string> side;
            for (std::size_t v = 0; v < nn; ++v)
                if (seen[v] && !node_labels[v].empty()) side.push_back(node_labels[v]);
            out[canonical_key(side, all)] = edges[cut].length;
        }
        return out;
    }
};

// Random unrooted binary tree on n labeled leaves, branch lengths uniform in
// [lo, hi]: start from a 3-star and attach leaves to random edges.
inline TestTree random_binary_tree(facadegen::Rng& rng, std::size_t n, double lo = 0.1,
                                   double hi = 2.0) {
    TestTree t;
    auto label = [&](std::size_t i) {
        std::string s = std::to_string(i + 1);
        return "L" + std::string(3 - std::min<std::size_t>(3, s.size()), '0') + s;
    };
    if (n == 2) {
        const int a = t.add_node(label(0));
        const int b = t.add_node(label(1));
        t.edges.push_back({a, b, rng.uniform(lo, hi)});
        return t;
    }
    const int center = t.add_node();
    for (int i = 0; i < 3; ++i) {
        const int leaf = t.add_node(label(i));
        t.edges.push_back({center, leaf, rng.uniform(lo, hi)});
    }
    for (std::size_t i = 3; i < n; ++i) {
        const std::size_t e = rng.below(t.edges.size());
        const int mid = t.add_node();
        const int leaf = t.add_node(label(i));
        const TestTree::Edge old = t.edges[e];
        // Split the old edge's length across the new midpoint.
        const double part = rng.uniform(0.25, 0.75);
        t.edges[e] = {old.a, mid, old.length * part};
        t.edges.push_back({mid, old.b, old.length * (1.0 - part)});
        t.edges.push_back({mid, leaf, rng.uniform(lo, hi)});
    }
    return t;
}

// Splits of a PhyloTree, by deleting each edge and reading leaf components.
inline std::map<SplitKey, double> phylo_splits(const facadegen::PhyloTree& t) {
    std::vector<std::string> all;
    for (const auto& n : t.nodes())
        if (n.is_leaf()) all.push_back(n.label);
    std::sort(all.begin(), all.end());

    std::map<SplitKey, double> out;
    for (std::size_t cut = 0; cut < t.edges().size(); ++cut) {
        std::vector<char> seen(t.nodes().size(), 0);
        std::vector<int> stack{t.edges()[cut].a};
        seen[t.edges()[cut].a] = 1;
        while (!stack.empty()) {
            const int v = stack.back();
            stack.pop_back();
            for (int e : t.nodes()[v].edges) {
                if (e == static_cast<int>(cut)) continue;
                const int u = t.neighbor(v, e);
                if (!seen[u]) {
                    seen[u] = 1;
                    stack.push_back(u);
                }
            }
        }
        std::vector<std::string> side;
        for (std::size_t v = 0; v < t.nodes().size(); ++v)
            if (seen[v] && t.nodes()[v].is_leaf()) side.push_back(t.nodes()[v].label);
        out[canonical_key(side, all)] = t.edges()[cut].length;
    }
    return out;
}

// A weighted circular split system generated on a random cycle, with the
// metric evaluated by direct membership tests.
struct TestCircularSystem {
    std::vector<std::string> labels;             // taxa, index order
    std::vector<std::size_t> cycle;              // taxa indices
    std::vector<std::vector<std::size_t>> side;  // sorted taxa sets
    std::vector<double> weight;

    facadegen::DistanceMatrix metric() const {
        const std::size_t n = labels.size();
        std::vector<double> d(n * n, 0.0);
        for (std::size_t s = 0; s < side.size(); ++s) {
            std::vector<char> in(n, 0);
            for (std::size_t t : side[s]) in[t] = 1;
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = i + 1; j < n; ++j)
                    if (in[i] != in[j]) {
                        d[i * n + j] += weight[s];
                        d[j * n + i] += weight[s];
                    }
        }
        return facadegen::DistanceMatrix(labels, d);
    }

    std::map<std::vector<std::size_t>, double> weight_by_side() const {
        std::map<std::vector<std::size_t>, double> out;
        for (std::size_t s = 0; s < side.size(); ++s) out[side[s]] = weight[s];
        return out;
    }
};

// Sides are arcs of the cycle, each kept with probability `keep`, canonical
// form excludes taxon 0.
inline TestCircularSystem random_circular_system(facadegen::Rng& rng, std::size_t n,
                                                 double keep = 0.3) {
    TestCircularSystem sys;
    for (std::size_t i = 0; i < n; ++i) sys.labels.push_back("c" + std::to_string(i + 1));
    sys.cycle.resize(n);
    for (std::size_t i = 0; i < n; ++i) sys.cycle[i] = i;
    rng.shuffle(sys.cycle);

    for (std::size_t lo = 1; lo < n; ++lo) {
        for (std::size_t hi = lo; hi < n; ++hi) {
            if (!rng.bernoulli(keep)) continue;
            std::vector<std::size_t> arc;
            for (std::size_t p = lo; p <= hi; ++p) arc.push_back(sys.cycle[p]);
            std::sort(arc.begin(), arc.end());
            // Cycle position 0 is not necessarily taxon 0; normalize the side.
            if (std::binary_search(arc.begin(), arc.end(), std::size_t{0})) {
                std::vector<std::size_t> other;
                for (std::size_t t = 0; t < n; ++t)
                    if (!std::binary_search(arc.begin(), arc.end(), t)) other.push_back(t);
                arc = std::move(other);
            }
            sys.side.push_back(arc);
            sys.weight.push_back(rng.uniform(0.1, 1.0));
        }
    }
    // Deduplicate sides (complement pairs can collide after normalizing).
    std::map<std::vector<std::size_t>, double> uniq;
    for (std::size_t s = 0; s < sys.side.size(); ++s) uniq[sys.side[s]] = sys.weight[s];
    sys.side.clear();
    sys.weight.clear();
    for (const auto& [side, w] : uniq) {
        sys.side.push_back(side);
        sys.weight.push_back(w);
    }
    return sys;
}

}  // namespace testfix
