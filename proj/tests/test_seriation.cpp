#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "facadegen/random.hpp"
#include "facadegen/seriation.hpp"

using namespace facadegen;

namespace {

TraitMatrix matrix_from(const std::vector<std::string>& rows) {
    std::vector<std::string> traits;
    for (std::size_t k = 0; k < rows.at(0).size(); ++k)
        traits.push_back("e" + std::to_string(k + 1));
    std::vector<std::string> taxa;
    std::vector<TraitVector> vecs;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        taxa.push_back("b" + std::to_string(i + 1));
        vecs.push_back(TraitVector::from_string(rows[i]));
    }
    return TraitMatrix(TraitCatalog(traits), taxa, vecs);
}

// Independent oracle: embedded absences evaluated straight off the definition.
std::size_t oracle_criterion(const TraitMatrix& m, const std::vector<std::size_t>& order) {
    std::size_t total = 0;
    for (std::size_t k = 0; k < m.trait_count(); ++k) {
        std::vector<std::size_t> hits;
        for (std::size_t pos = 0; pos < order.size(); ++pos)
            if (m.row(order[pos]).bits[k]) hits.push_back(pos);
        if (hits.size() < 2) continue;
        for (std::size_t pos = hits.front() + 1; pos < hits.back(); ++pos)
            if (!m.row(order[pos]).bits[k]) ++total;
    }
    return total;
}

std::size_t oracle_minimum(const TraitMatrix& m) {
    std::vector<std::size_t> perm(m.taxa_count());
    std::iota(perm.begin(), perm.end(), 0);
    std::size_t best = oracle_criterion(m, perm);
    while (std::next_permutation(perm.begin(), perm.end()))
        best = std::min(best, oracle_criterion(m, perm));
    return best;
}

TraitMatrix random_matrix(Rng& rng, std::size_t taxa, std::size_t traits) {
    std::vector<std::string> rows;
    for (std::size_t i = 0; i < taxa; ++i) {
        std::string r(traits, '0');
        for (auto& c : r) c = rng.bernoulli(0.5) ? '1' : '0';
        rows.push_back(r);
    }
    return matrix_from(rows);
}

// Every column is a contiguous block under the identity order, then rows are
// shuffled; a zero-criterion order exists by construction.
TraitMatrix shuffled_petrie_matrix(Rng& rng, std::size_t taxa, std::size_t traits) {
    std::vector<std::string> rows(taxa, std::string(traits, '0'));
    for (std::size_t k = 0; k < traits; ++k) {
        const std::size_t a = rng.below(taxa);
        const std::size_t b = rng.below(taxa);
        for (std::size_t i = std::min(a, b); i <= std::max(a, b); ++i) rows[i][k] = '1';
    }
    std::vector<std::string> shuffled = rows;
    rng.shuffle(shuffled);
    return matrix_from(shuffled);
}

}  // namespace

TEST_CASE("petrie criterion examples") {
    const TraitMatrix perfect = matrix_from({"100", "110", "011", "001"});
    std::vector<std::size_t> id{0, 1, 2, 3};
    CHECK(petrie_criterion(perfect, id) == 0);

    std::vector<std::size_t> rev{3, 2, 1, 0};
    CHECK(petrie_criterion(perfect, rev) == 0);

    const TraitMatrix gap = matrix_from({"1", "0", "1", "0"});
    CHECK(petrie_criterion(gap, id) == 1);

    CHECK_THROWS_AS(petrie_criterion(gap, std::vector<std::size_t>{0, 0, 1, 2}), Error);
}

TEST_CASE("brute force seriation") {
    const TraitMatrix two = matrix_from({"10", "01"});
    const SeriationResult r2 = brute_force_seriate(two);
    CHECK(r2.order == std::vector<std::size_t>{0, 1});
    CHECK(r2.criterion == 0);

    // Shuffled perfect Petrie matrix recovers criterion 0.
    const TraitMatrix shuffled = matrix_from({"011", "110", "100", "001"});
    CHECK(brute_force_seriate(shuffled).criterion == 0);

    const TraitMatrix big = matrix_from({"1", "1", "1", "1", "1", "1", "1", "1", "1", "1", "1"});
    CHECK_THROWS_AS(brute_force_seriate(big), Error);
}

TEST_CASE("brute force matches exhaustive oracle on random matrices") {
    Rng rng(101);
    for (int trial = 0; trial < 20; ++trial) {
        const TraitMatrix m = random_matrix(rng, 6, 8);
        const SeriationResult r = brute_force_seriate(m);
        CHECK(r.criterion == oracle_minimum(m));
        CHECK(r.criterion == oracle_criterion(m, r.order));
        CHECK(r.order.front() < r.order.back());
    }
}

TEST_CASE("seriate recovers perfect orders and beats nothing below brute force") {
    Rng rng(55);
    int optimal = 0;
    for (int trial = 0; trial < 25; ++trial) {
        const TraitMatrix m = random_matrix(rng, 7, 9);
        const SeriationResult fast = seriate(m, 16, trial);
        const SeriationResult exact = brute_force_seriate(m);
        CHECK(fast.criterion >= exact.criterion);
        CHECK(fast.criterion == oracle_criterion(m, fast.order));
        if (fast.criterion == exact.criterion) ++optimal;
    }
    CHECK(optimal >= 23);
}

TEST_CASE("seriate on shuffled petrie matrices") {
    Rng rng(77);
    for (int trial = 0; trial < 10; ++trial) {
        const TraitMatrix m = shuffled_petrie_matrix(rng, 12, 10);
        const SeriationResult r = seriate(m, 16, trial);
        CHECK(r.criterion == 0);
    }
}

TEST_CASE("seriate never exceeds its spectral start and is locally optimal") {
    Rng rng(99);
    for (int trial = 0; trial < 10; ++trial) {
        const TraitMatrix m = random_matrix(rng, 9, 7);
        const SeriationResult r = seriate(m, 4, trial);
        CHECK(r.criterion <= petrie_criterion(m, spectral_order(m)));

        // No single swap or segment reversal improves the result.
        std::vector<std::size_t> order = r.order;
        for (std::size_t i = 0; i + 1 < order.size(); ++i) {
            for (std::size_t j = i + 1; j < order.size(); ++j) {
                std::swap(order[i], order[j]);
                CHECK(oracle_criterion(m, order) >= r.criterion);
                std::swap(order[i], order[j]);
                std::reverse(order.begin() + i, order.begin() + j + 1);
                CHECK(oracle_criterion(m, order) >= r.criterion);
                std::reverse(order.begin() + i, order.begin() + j + 1);
            }
        }
    }
}

TEST_CASE("seriate edge cases") {
    const TraitMatrix two = matrix_from({"10", "01"});
    CHECK(seriate(two).criterion == 0);

    const TraitMatrix same = matrix_from({"11", "11", "11"});
    const SeriationResult r = seriate(same);
    CHECK(r.criterion == 0);
    CHECK(r.order == std::vector<std::size_t>{0, 1, 2});

    CHECK_THROWS_AS(seriate(matrix_from({"1"})), Error);
}

TEST_CASE("seriate is deterministic per seed") {
    Rng rng(123);
    const TraitMatrix m = random_matrix(rng, 10, 8);
    const SeriationResult a = seriate(m, 8, 42);
    const SeriationResult b = seriate(m, 8, 42);
    CHECK(a.order == b.order);
    CHECK(a.criterion == b.criterion);
}

TEST_CASE("segment order") {
    const TraitMatrix m = matrix_from({"100", "110", "011", "001"});
    SeriationResult r{{0, 1, 2, 3}, 0, "local-search"};
    const DistanceMatrix d({"b1", "b2", "b3", "b4"},
                           {0.0, 0.1, 0.5, 0.6,
                            0.1, 0.0, 0.9, 0.5,
                            0.5, 0.9, 0.0, 0.1,
                            0.6, 0.5, 0.1, 0.0});

    const auto one = segment_order(r, d, 1);
    REQUIRE(one.size() == 1);
    CHECK(one[0].size() == 4);

    const auto all = segment_order(r, d, 4);
    CHECK(all.size() == 4);
    for (const auto& g : all) CHECK(g.size() == 1);

    // Adjacent gaps are (0.1, 0.9, 0.1): the unique cut is after position 1.
    const auto two = segment_order(r, d, 2);
    REQUIRE(two.size() == 2);
    CHECK(two[0] == std::vector<std::size_t>{0, 1});
    CHECK(two[1] == std::vector<std::size_t>{2, 3});

    CHECK_THROWS_AS(segment_order(r, d, 0), Error);
    CHECK_THROWS_AS(segment_order(r, d, 5), Error);
}
