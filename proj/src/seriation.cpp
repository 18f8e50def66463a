#include "facadegen/seriation.hpp"

#include <algorithm>
#include <numeric>

#include <Eigen/Dense>

#include "facadegen/random.hpp"

namespace facadegen {
namespace {

void check_permutation(const std::vector<std::size_t>& order, std::size_t n) {
    if (order.size() != n) throw Error("validation", "order is not a permutation of the taxa");
    std::vector<bool> seen(n, false);
    for (std::size_t i : order) {
        if (i >= n || seen[i])
            throw Error("validation", "order is not a permutation of the taxa");
        seen[i] = true;
    }
}

// Lexicographically smaller of an order and its reversal, preferring
// first < last. Seriation direction carries no meaning.
void canonicalize_reversal(std::vector<std::size_t>& order) {
    if (order.size() >= 2 && order.front() > order.back())
        std::reverse(order.begin(), order.end());
}

std::size_t criterion_unchecked(const TraitMatrix& m, const std::vector<std::size_t>& order) {
    const std::size_t n = m.taxa_count();
    const std::size_t t = m.trait_count();
    std::size_t total = 0;
    for (std::size_t k = 0; k < t; ++k) {
        std::size_t first = n, last = n, present = 0;
        for (std::size_t pos = 0; pos < n; ++pos) {
            if (m.row(order[pos]).bits[k]) {
                if (first == n) first = pos;
                last = pos;
                ++present;
            }
        }
        if (present >= 2) total += (last - first + 1) - present;
    }
    return total;
}

bool all_rows_identical(const TraitMatrix& m) {
    for (std::size_t i = 1; i < m.taxa_count(); ++i)
        if (!(m.row(i) == m.row(0))) return false;
    return true;
}

// First-improvement descent over all pairwise swaps and segment reversals.
void local_search(const TraitMatrix& m, std::vector<std::size_t>& order, std::size_t& crit) {
    const std::size_t n = order.size();
    bool improved = true;
    while (improved) {
        improved = false;
        for (std::size_t i = 0; i + 1 < n && !improved; ++i) {
            for (std::size_t j = i + 1; j < n && !improved; ++j) {
                std::swap(order[i], order[j]);
                std::size_t c = criterion_unchecked(m, order);
                if (c < crit) {
                    crit = c;
                    improved = true;
                } else {
                    std::swap(order[i], order[j]);
                }
                if (improved) break;
                // Segment reversal over [i, j]; skip j == i+1, identical to the swap.
                if (j > i + 1) {
                    std::reverse(order.begin() + i, order.begin() + j + 1);
                    c = criterion_unchecked(m, order);
                    if (c < crit) {
                        crit = c;
                        improved = true;
                    } else {
                        std::reverse(order.begin() + i, order.begin() + j + 1);
                    }
                }
            }
        }
    }
}

}  // namespace

std::size_t petrie_criterion(const TraitMatrix& m, const std::vector<std::size_t>& order) {
    check_permutation(order, m.taxa_count());
    return criterion_unchecked(m, order);
}

SeriationResult brute_force_seriate(const TraitMatrix& m) {
    const std::size_t n = m.taxa_count();
    if (n == 0) throw Error("empty-input", "cannot seriate an empty matrix");
    if (n > 10) throw Error("size", "brute-force seriation is limited to 10 taxa");

    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    if (n == 1) return {perm, 0, "brute-force"};

    std::size_t best = criterion_unchecked(m, perm);
    do {
        best = std::min(best, criterion_unchecked(m, perm));
    } while (std::next_permutation(perm.begin(), perm.end()));

    // Second pass: first optimum in lexicographic order with front < back.
    std::iota(perm.begin(), perm.end(), 0);
    do {
        if (perm.front() < perm.back() && criterion_unchecked(m, perm) == best)
            return {perm, best, "brute-force"};
    } while (std::next_permutation(perm.begin(), perm.end()));
    throw Error("validation", "unreachable: no canonical optimum found");
}

std::vector<std::size_t> spectral_order(const TraitMatrix& m) {
    const std::size_t n = m.taxa_count();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    if (n <= 2) return order;

    // Similarity = shared catalog length minus Hamming distance; Laplacian of
    // that weighted graph, sorted by the Fiedler vector.
    const double len = static_cast<double>(m.trait_count());
    Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double s = len - hamming_distance(m.row(i), m.row(j), false);
            lap(i, j) -= s;
            lap(j, i) -= s;
            lap(i, i) += s;
            lap(j, j) += s;
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(lap);
    const Eigen::VectorXd fiedler = es.eigenvectors().col(1);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return fiedler(a) < fiedler(b); });
    return order;
}

SeriationResult seriate(const TraitMatrix& m, std::size_t restarts, std::uint64_t seed) {
    const std::size_t n = m.taxa_count();
    if (n < 2) throw Error("size", "seriation requires at least 2 taxa");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    if (all_rows_identical(m)) return {order, 0, "local-search"};

    order = spectral_order(m);
    std::size_t crit = criterion_unchecked(m, order);
    local_search(m, order, crit);

    std::vector<std::size_t> best = order;
    std::size_t best_crit = crit;
    for (std::size_t r = 0; r < restarts && best_crit > 0; ++r) {
        Rng rng = Rng::keyed(seed, "seriate-restart-" + std::to_string(r));
        std::vector<std::size_t> trial = best;
        // Perturbation: a few random segment reversals.
        for (int kick = 0; kick < 3; ++kick) {
            std::size_t a = rng.below(n);
            std::size_t b = rng.below(n);
            if (a > b) std::swap(a, b);
            std::reverse(trial.begin() + a, trial.begin() + b + 1);
        }
        std::size_t c = criterion_unchecked(m, trial);
        local_search(m, trial, c);
        if (c < best_crit) {
            best_crit = c;
            best = trial;
        }
    }
    canonicalize_reversal(best);
    return {best, best_crit, "local-search"};
}

std::vector<std::vector<std::size_t>> segment_order(const SeriationResult& result,
                                                    const DistanceMatrix& d, std::size_t k) {
    const std::size_t n = result.order.size();
    if (d.size() != n) throw Error("dimension", "distance matrix does not match the order");
    if (k < 1 || k > n) throw Error("validation", "group count must be in [1, taxa count]");

    // Gaps between consecutive taxa, largest first, ties to earlier position.
    std::vector<std::size_t> gap_pos(n >= 1 ? n - 1 : 0);
    std::iota(gap_pos.begin(), gap_pos.end(), 0);
    std::stable_sort(gap_pos.begin(), gap_pos.end(), [&](std::size_t a, std::size_t b) {
        const double da = d.at(result.order[a], result.order[a + 1]);
        const double db = d.at(result.order[b], result.order[b + 1]);
        return da > db;
    });
    std::vector<std::size_t> cuts(gap_pos.begin(),
                                  gap_pos.begin() + static_cast<std::ptrdiff_t>(k - 1));
    std::sort(cuts.begin(), cuts.end());

    std::vector<std::vector<std::size_t>> groups;
    std::size_t start = 0;
    for (std::size_t cut : cuts) {
        groups.emplace_back(result.order.begin() + start, result.order.begin() + cut + 1);
        start = cut + 1;
    }
    groups.emplace_back(result.order.begin() + start, result.order.end());
    return groups;
}

}  // namespace facadegen
