#pragma once

#include <string>
#include <utility>
#include <vector>

#include "facadegen/core.hpp"

namespace facadegen {

// Unrooted tree with branch lengths. Leaves carry labels; internal nodes have
// degree 3 (a two-leaf tree is the single edge between its leaves).
class PhyloTree {
public:
    struct Node {
        std::string label;           // empty for internal nodes
        std::vector<int> edges;      // incident edge indices
        bool is_leaf() const { return !label.empty(); }
    };
    struct Edge {
        int a = -1, b = -1;
        double length = 0.0;
    };

    int add_node(std::string label = {});
    int add_edge(int a, int b, double length);

    const std::vector<Node>& nodes() const noexcept { return nodes_; }
    const std::vector<Edge>& edges() const noexcept { return edges_; }
    std::vector<Edge>& mutable_edges() noexcept { return edges_; }

    // Node reached from `node` over `edge`.
    int neighbor(int node, int edge) const;

    std::vector<int> leaf_nodes() const;
    std::size_t leaf_count() const;

    // Serialization root: the last internal node created by construction, or
    // -1 for a two-leaf tree.
    int serial_root = -1;

    // Connectivity, degree and label checks; throws Error("validation").
    void validate() const;

private:
    std::vector<Node> nodes_;
    std::vector<Edge> edges_;
};

// Saitou-Nei neighbor joining. Ties in the Q criterion break to the smallest
// index pair. With clamp_negative, a negative branch length is raised to zero
// and the deficit moved onto its sibling branch.
PhyloTree nj(const DistanceMatrix& d, bool clamp_negative = false);

// Pairwise leaf path-length sums; labels sorted so the result does not depend
// on construction order.
DistanceMatrix tree_distance_matrix(const PhyloTree& t);

// Leaf pairs sharing an internal neighbor, each pair and the list sorted by
// label.
std::vector<std::pair<std::string, std::string>> cherries(const PhyloTree& t);

// 100 * (1 - sum((d-model)^2) / sum(d^2)) over unordered pairs.
double ls_fit(const DistanceMatrix& d, const DistanceMatrix& model);

// Newick text rooted at serial_root, lengths with `precision` decimals.
// Labels containing metacharacters are single-quoted.
std::string to_newick(const PhyloTree& t, int precision = 6);

// Inverse of to_newick; suppresses a degree-2 root left by two-leaf output.
PhyloTree parse_newick(const std::string& text);

}  // namespace facadegen
