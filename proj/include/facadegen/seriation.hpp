#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "facadegen/core.hpp"

namespace facadegen {

struct SeriationResult {
    std::vector<std::size_t> order;  // permutation of taxa indices
    std::size_t criterion = 0;       // embedded-absence count under `order`
    std::string method;              // spectral, local-search or brute-force
};

// Embedded absences: per trait, the number of 0 rows strictly between the
// first and last 1 row under `order`; traits with <= 1 presence score 0.
std::size_t petrie_criterion(const TraitMatrix& m, const std::vector<std::size_t>& order);

// Exhaustive global optimum, guarded to <= 10 taxa. Among optima, returns the
// lexicographically smallest order whose first element is below its last.
SeriationResult brute_force_seriate(const TraitMatrix& m);

// Fiedler-vector ordering of the trait-similarity graph; the starting point
// for the local search.
std::vector<std::size_t> spectral_order(const TraitMatrix& m);

// Spectral start, then pairwise-swap and segment-reversal descent, best over
// `restarts` seeded perturbations.
SeriationResult seriate(const TraitMatrix& m, std::size_t restarts = 16,
                        std::uint64_t seed = 0);

// Contiguous segments of the order, cut at the k-1 largest adjacent-pair
// distances (ties to the earlier position).
std::vector<std::vector<std::size_t>> segment_order(const SeriationResult& result,
                                                    const DistanceMatrix& d, std::size_t k);

}  // namespace facadegen
