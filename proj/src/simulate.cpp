#include "facadegen/simulate.hpp"

#include <algorithm>

#include "facadegen/neighbornet.hpp"
#include "facadegen/njtree.hpp"
#include "facadegen/random.hpp"
#include "facadegen/seriation.hpp"

namespace facadegen {

SimMode parse_sim_mode(const std::string& name) {
    if (name == "line") return SimMode::Line;
    if (name == "tree") return SimMode::Tree;
    if (name == "network") return SimMode::Network;
    throw Error("usage", "unknown mode '" + name + "' (expected line, tree or network)");
}

std::string sim_mode_name(SimMode mode) {
    switch (mode) {
        case SimMode::Line: return "line";
        case SimMode::Tree: return "tree";
        case SimMode::Network: return "network";
    }
    return "?";
}

void SimConfig::validate() const {
    if (n_taxa < 4) throw Error("validation", "simulation requires at least 4 taxa");
    if (n_traits < 4) throw Error("validation", "simulation requires at least 4 traits");
    if (flip_rate < 0.0 || flip_rate >= 1.0)
        throw Error("validation", "flip rate must be in [0,1)");
    if (borrow_rate < 0.0 || borrow_rate >= 1.0)
        throw Error("validation", "borrow rate must be in [0,1)");
    if (borrow_rate != 0.0 && mode != SimMode::Network)
        throw Error("validation", "borrow rate requires network mode");
}

namespace {

std::string taxon_label(SimMode mode, std::size_t index, std::size_t n) {
    std::size_t width = 1;
    for (std::size_t v = n - 1; v >= 10; v /= 10) ++width;
    std::string digits = std::to_string(index);
    const char prefix = mode == SimMode::Line ? 'g' : 't';
    return prefix + std::string(width - digits.size(), '0') + digits;
}

}  // namespace

SimResult simulate(const SimConfig& cfg) {
    cfg.validate();
    Rng rng = Rng::keyed(cfg.seed, "simulate");

    SimResult out;
    out.config = cfg;
    std::vector<std::uint8_t> root(cfg.n_traits);
    for (auto& b : root) b = rng.bernoulli(0.5) ? 1 : 0;
    out.root = TraitVector(root);

    std::vector<std::vector<std::uint8_t>> state;  // per lineage
    state.push_back(root);

    auto mutate = [&](int lineage, std::size_t generation) {
        for (std::size_t k = 0; k < cfg.n_traits; ++k) {
            if (!rng.bernoulli(cfg.flip_rate)) continue;
            state[lineage][k] ^= 1;
            out.history.push_back({SimEvent::Kind::Mutation, generation, lineage, -1,
                                   static_cast<int>(k), state[lineage][k]});
        }
    };

    if (cfg.mode == SimMode::Line) {
        // A single lineage; each generation replaces its parent and is sampled.
        out.chain_order.push_back(0);
        for (std::size_t g = 1; g < cfg.n_taxa; ++g) {
            const int child = static_cast<int>(g);
            state.push_back(state[child - 1]);
            out.history.push_back(
                {SimEvent::Kind::Birth, g, child, child - 1, -1, 0});
            mutate(child, g);
            out.chain_order.push_back(child);
        }
    } else {
        // Tree growth: one random lineage splits per generation and the
        // daughter mutates at birth, as in line mode. Network mode adds a
        // per-lineage borrow draw each generation; tree mode runs the same
        // path with a zero rate, so equal seeds give byte-identical output.
        const double beta = cfg.mode == SimMode::Network ? cfg.borrow_rate : 0.0;
        std::vector<int> active{0};
        std::size_t g = 0;
        while (active.size() < cfg.n_taxa) {
            ++g;
            if (active.size() >= 2) {
                for (std::size_t pos = 0; pos < active.size(); ++pos) {
                    const int lineage = active[pos];
                    if (!rng.bernoulli(beta)) continue;
                    std::size_t pick = rng.below(active.size() - 1);
                    if (pick >= pos) ++pick;  // skip self
                    const int donor = active[pick];
                    const int trait = static_cast<int>(rng.below(cfg.n_traits));
                    state[lineage][trait] = state[donor][trait];
                    SimEvent e{SimEvent::Kind::Borrow, g, lineage, donor, trait,
                               state[lineage][trait]};
                    out.history.push_back(e);
                    out.borrow_log.push_back(e);
                }
            }
            const int parent = active[rng.below(active.size())];
            const int child = static_cast<int>(state.size());
            state.push_back(state[parent]);
            active.push_back(child);
            out.history.push_back({SimEvent::Kind::Birth, g, child, parent, -1, 0});
            out.tree_edges.emplace_back(parent, child);
            mutate(child, g);
        }
    }

    // Sample: line mode keeps every generation, tree/network the leaves (all
    // lineages are alive at the end because splitting copies forward).
    std::vector<std::string> taxa;
    std::vector<TraitVector> rows;
    for (std::size_t i = 0; i < cfg.n_taxa; ++i) {
        taxa.push_back(taxon_label(cfg.mode, i, cfg.n_taxa));
        rows.emplace_back(state[i]);
    }
    std::vector<std::string> trait_names;
    for (std::size_t k = 0; k < cfg.n_traits; ++k)
        trait_names.push_back("trait" + std::to_string(k + 1));
    out.matrix = TraitMatrix(TraitCatalog(trait_names), std::move(taxa), std::move(rows));
    return out;
}

TraitMatrix replay_history(const SimResult& r) {
    std::vector<std::vector<std::uint8_t>> state;
    state.push_back(r.root.bits);
    for (const auto& e : r.history) {
        switch (e.kind) {
            case SimEvent::Kind::Birth:
                if (static_cast<std::size_t>(e.lineage) != state.size())
                    throw Error("validation", "history births are out of order");
                state.push_back(state[e.source]);
                break;
            case SimEvent::Kind::Mutation:
                state[e.lineage][e.trait] = e.value;
                break;
            case SimEvent::Kind::Borrow:
                state[e.lineage][e.trait] = e.value;
                break;
        }
    }
    std::vector<TraitVector> rows;
    std::vector<std::string> taxa;
    for (std::size_t i = 0; i < r.config.n_taxa; ++i) {
        taxa.push_back(r.matrix.taxon(i));
        rows.emplace_back(state[i]);
    }
    return TraitMatrix(r.matrix.catalog(), std::move(taxa), std::move(rows));
}

Diagnosis diagnose(const TraitMatrix& m, std::uint64_t seed) {
    if (m.taxa_count() < 4)
        throw Error("size", "diagnosis requires at least 4 taxa");
    const DistanceMatrix d = distance_matrix(m, Metric::HammingNormalized);
    Diagnosis out;
    out.delta = delta_score(d, {}, seed);
    const PhyloTree tree = nj(d, /*clamp_negative=*/true);
    out.tree_fit = ls_fit(d, tree_distance_matrix(tree));
    out.seriation_criterion = seriate(m, 16, seed).criterion;
    return out;
}

}  // namespace facadegen
