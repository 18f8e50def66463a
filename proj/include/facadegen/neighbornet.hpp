#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "facadegen/core.hpp"
#include "facadegen/nnls.hpp"

namespace facadegen {

// Circular ordering of taxa indices, canonicalized to start at taxon 0 with
// the smaller of the two possible second elements (rotations and reflections
// are the same cycle).
class CircularOrdering {
public:
    CircularOrdering() = default;
    explicit CircularOrdering(std::vector<std::size_t> cycle);

    const std::vector<std::size_t>& cycle() const noexcept { return cycle_; }
    std::size_t size() const noexcept { return cycle_.size(); }

    bool operator==(const CircularOrdering&) const = default;

private:
    std::vector<std::size_t> cycle_;
};

// A taxa bipartition, stored as the sorted side that excludes taxon 0.
struct Split {
    std::vector<std::size_t> side;
    double weight = 0.0;

    bool separates(std::size_t a, std::size_t b) const;
    bool operator==(const Split& o) const { return side == o.side; }
};

// Two splits are compatible when one of the four side intersections is empty.
bool splits_compatible(const Split& a, const Split& b, std::size_t n_taxa);

// Weighted splits that are all arcs of one circular ordering.
struct SplitSystem {
    std::vector<std::string> taxa;
    CircularOrdering ordering;
    std::vector<Split> splits;

    // Sum of weights of splits separating each taxa pair.
    DistanceMatrix split_metric() const;

    // Invariant check: sides canonical, circular w.r.t. ordering, unique,
    // weights non-negative. Throws Error("validation").
    void validate() const;
};

// Agglomerative circular ordering. n < 4 returns the identity cycle.
CircularOrdering nnet_ordering(const DistanceMatrix& d);

// All n(n-1)/2 arc splits of the ordering, unit weights, canonical sides.
std::vector<Split> circular_splits(const CircularOrdering& ordering);

// Non-negative least squares over the full circular split system of
// `ordering` against the pairwise distances, by Lawson-Hanson active set.
// KKT within tol at exit: gradient >= -tol on zero weights, |gradient| <= tol
// on positive ones.
std::vector<double> nnls_weights(const CircularOrdering& ordering, const DistanceMatrix& d,
                                 double tol = 1e-10, std::size_t max_iter = 0,
                                 NnlsReport* report = nullptr);

// ordering -> circular splits -> NNLS -> drop weights below weight_threshold.
SplitSystem neighbor_net(const DistanceMatrix& d, double weight_threshold = 1e-6);

// Mean quartet delta: with the three pairwise sums of a quartet sorted
// m1 >= m2 >= m3, the quartet scores (m1-m2)/(m1-m3), 0 when m1 == m3.
// Exhaustive for n <= 20 unless a sample count is given.
double delta_score(const DistanceMatrix& d, std::optional<std::size_t> sample = {},
                   std::uint64_t seed = 0);

}  // namespace facadegen
