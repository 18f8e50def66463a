#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "facadegen/core.hpp"

namespace facadegen {

enum class SimMode { Line, Tree, Network };

SimMode parse_sim_mode(const std::string& name);
std::string sim_mode_name(SimMode mode);

struct SimConfig {
    SimMode mode = SimMode::Tree;
    std::size_t n_taxa = 25;
    std::size_t n_traits = 14;
    double flip_rate = 0.05;    // per trait per generation
    double borrow_rate = 0.0;   // per taxon per generation, network mode only
    std::uint64_t seed = 0;

    void validate() const;
};

struct SimEvent {
    enum class Kind { Birth, Mutation, Borrow };
    Kind kind;
    std::size_t generation = 0;
    int lineage = -1;
    int source = -1;  // parent for births, donor for borrows
    int trait = -1;
    std::uint8_t value = 0;
};

struct SimResult {
    SimConfig config;
    TraitMatrix matrix;       // sampled extant taxa
    TraitVector root;
    std::vector<SimEvent> history;

    // Ground truth of the generating structure.
    std::vector<int> chain_order;                    // line mode
    std::vector<std::pair<int, int>> tree_edges;     // parent -> child lineage
    std::vector<SimEvent> borrow_log;                // network mode borrow events
};

// Deterministic for a fixed config; replay_history(result) reproduces the
// matrix bit for bit.
SimResult simulate(const SimConfig& cfg);

TraitMatrix replay_history(const SimResult& r);

struct Diagnosis {
    double delta = 0.0;            // quartet delta of the trait distances
    double tree_fit = 0.0;         // ls_fit against the NJ tree metric, percent
    std::size_t seriation_criterion = 0;
};

// Model-selection statistics under default settings (normalized Hamming, NJ
// with clamped branch lengths, 16 seriation restarts).
Diagnosis diagnose(const TraitMatrix& m, std::uint64_t seed = 0);

}  // namespace facadegen
