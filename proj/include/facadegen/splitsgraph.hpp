#pragma once

#include <string>
#include <vector>

#include "facadegen/neighbornet.hpp"
#include "facadegen/njtree.hpp"

namespace facadegen {

// Network realization of a split system. Each edge belongs to one split and
// carries that split's weight as its length; removing all edges of a split
// separates the taxa into the split's two sides.
struct SplitsGraph {
    struct Node {
        std::vector<std::size_t> taxa;  // taxa co-located here (usually 0 or 1)
        double x = 0.0, y = 0.0;        // set by equal_angle_layout
    };
    struct Edge {
        int a = -1, b = -1;
        int split_id = -1;  // index into the source system's split list
        double length = 0.0;
    };

    std::vector<std::string> taxa_labels;
    std::vector<Node> nodes;
    std::vector<Edge> edges;
    bool has_layout = false;

    int node_of_taxon(std::size_t taxon) const;
};

// Incremental convex-hull construction, inserting splits in decreasing
// weight (ties by side ordering). Validates the system first.
SplitsGraph build_splits_graph(const SplitSystem& s);

// Max over taxa pairs of |shortest-path distance - split metric|.
double verify_graph_metric(const SplitsGraph& g, const SplitSystem& s);

// All-pairs taxa distances by Dijkstra over edge lengths.
DistanceMatrix graph_distance_matrix(const SplitsGraph& g);

// Equal-angle coordinates: every edge of a split is drawn as the same vector,
// whose direction is the middle angle of the split's arc of the cycle.
void equal_angle_layout(SplitsGraph& g, const SplitSystem& s);

// Average-linkage agglomerative clustering cut at k clusters. Merge ties
// break toward the smallest member indices; ids are dense 1..k in order of
// each cluster's smallest member.
struct StyleClusters {
    std::size_t k = 0;
    std::vector<int> assignment;  // taxon index -> cluster id (1-based)
    std::string method;
};

StyleClusters cluster_styles(const DistanceMatrix& d, std::size_t k);

// Interchange block:
//   #SPLITS
//   ntax=<n>
//   nsplits=<m>
//   cycle=<space-separated 1-based taxa indices>
//   <weight> <comma-separated 1-based members of the side excluding taxon 1>
std::string write_splits_text(const SplitSystem& s);
SplitSystem read_splits_text(const std::string& text);
SplitSystem read_splits_file(const std::string& path);

// True when all splits are pairwise compatible (the graph is a tree).
bool splits_compatible_system(const SplitSystem& s);

// Tree view of a compatible system's graph; zero-length pendants are added
// for taxa sharing a node, degree-2 nodes are suppressed.
PhyloTree splits_tree(const SplitSystem& s);

// DOT with split and len edge attributes.
std::string to_dot(const SplitsGraph& g);

// SVG of the laid-out graph; `clusters` (optional) colors taxa labels.
std::string to_svg(const SplitsGraph& g, const StyleClusters* clusters = nullptr);

}  // namespace facadegen
