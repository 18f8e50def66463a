#include <doctest.h>

#include <cmath>

#include "facadegen/njtree.hpp"
#include "facadegen/random.hpp"
#include "helpers.hpp"

using namespace facadegen;
using namespace testfix;

namespace {

bool t_is_pendant(const PhyloTree& t, const PhyloTree::Edge& e, const std::string& label) {
    return t.nodes()[e.a].label == label || t.nodes()[e.b].label == label;
}

}  // namespace

TEST_CASE("nj on two and three taxa") {
    const DistanceMatrix two({"A", "B"}, {0.0, 0.8, 0.8, 0.0});
    const PhyloTree t2 = nj(two);
    REQUIRE(t2.edges().size() == 1);
    CHECK(t2.edges()[0].length == doctest::Approx(0.8));
    CHECK(to_newick(t2, 1) == "(A:0.4,B:0.4);");

    const DistanceMatrix three({"A", "B", "C"},
                               {0.0, 3.0, 4.0,
                                3.0, 0.0, 5.0,
                                4.0, 5.0, 0.0});
    const PhyloTree t3 = nj(three);
    CHECK(t3.edges().size() == 3);
    const DistanceMatrix m3 = tree_distance_matrix(t3);
    CHECK(m3.at(0, 1) == doctest::Approx(3.0));
    // Three-point branch lengths 1, 2, 3.
    for (const auto& e : t3.edges()) {
        const auto& leaf = t3.nodes()[e.a].is_leaf() ? t3.nodes()[e.a] : t3.nodes()[e.b];
        if (leaf.label == "A") CHECK(e.length == doctest::Approx(1.0));
        if (leaf.label == "B") CHECK(e.length == doctest::Approx(2.0));
        if (leaf.label == "C") CHECK(e.length == doctest::Approx(3.0));
    }

    CHECK_THROWS_AS(nj(DistanceMatrix({"A"}, {0.0})), Error);
}

TEST_CASE("nj recovers the 4-taxon additive example") {
    // Tree ((A:1,B:2):1,(C:3,D:4)).
    const std::vector<std::string> labels{"A", "B", "C", "D"};
    const DistanceMatrix d(labels, {0, 3, 5, 6,
                                    3, 0, 6, 7,
                                    5, 6, 0, 7,
                                    6, 7, 7, 0});
    const PhyloTree t = nj(d);
    CHECK(t.edges().size() == 5);  // 2n-3

    const auto splits = phylo_splits(t);
    const SplitKey ab_split = canonical_key({"C", "D"}, labels);
    REQUIRE(splits.count(ab_split) == 1);
    CHECK(splits.at(ab_split) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(splits.at(canonical_key({"B"}, labels)) == doctest::Approx(2.0));
    CHECK(splits.at(canonical_key({"C"}, labels)) == doctest::Approx(3.0));
    CHECK(splits.at(canonical_key({"D"}, labels)) == doctest::Approx(4.0));

    const DistanceMatrix back = tree_distance_matrix(t);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j)
            CHECK(back.at(i, j) == doctest::Approx(d.at(i, j)).epsilon(1e-12));

    CHECK(cherries(t) ==
          std::vector<std::pair<std::string, std::string>>{{"A", "B"}, {"C", "D"}});
}

TEST_CASE("nj additive recovery on random trees") {
    Rng rng(2024);
    for (std::size_t n : {4, 6, 10, 16}) {
        for (int trial = 0; trial < 10; ++trial) {
            const TestTree gen = random_binary_tree(rng, n);
            const PhyloTree t = nj(gen.metric());
            CHECK(t.edges().size() == 2 * n - 3);
            const auto want = gen.splits();
            const auto got = phylo_splits(t);
            REQUIRE(got.size() == want.size());
            for (const auto& [key, len] : want) {
                REQUIRE(got.count(key) == 1);
                CHECK(std::abs(got.at(key) - len) < 1e-9);
            }
        }
    }
}

TEST_CASE("nj clamps negative branch lengths on request") {
    // A and B join first; B's branch comes out negative on this input.
    const DistanceMatrix d({"A", "B", "C", "D"},
                           {0.0, 2.0, 10.0, 10.0,
                            2.0, 0.0, 1.0, 1.0,
                            10.0, 1.0, 0.0, 1.0,
                            10.0, 1.0, 1.0, 0.0});
    const PhyloTree raw = nj(d, false);
    bool saw_negative = false;
    for (const auto& e : raw.edges()) saw_negative |= e.length < 0.0;
    CHECK(saw_negative);

    const PhyloTree clamped = nj(d, true);
    double raw_ab = 0.0, clamped_ab = 0.0;
    for (const auto& e : raw.edges())
        if (t_is_pendant(raw, e, "A") || t_is_pendant(raw, e, "B")) raw_ab += e.length;
    for (const auto& e : clamped.edges()) {
        CHECK(e.length >= 0.0);
        if (t_is_pendant(clamped, e, "A") || t_is_pendant(clamped, e, "B"))
            clamped_ab += e.length;
    }
    // The deficit transfer keeps the joined pair's total.
    CHECK(clamped_ab == doctest::Approx(raw_ab));
}

TEST_CASE("cherries") {
    const PhyloTree star = parse_newick("(A:1,B:2,C:3);");
    CHECK(cherries(star) == std::vector<std::pair<std::string, std::string>>{
                                {"A", "B"}, {"A", "C"}, {"B", "C"}});

    const PhyloTree caterpillar = parse_newick("(a:1,(b:1,(c:1,(d:1,e:1):1):1):1);");
    CHECK(cherries(caterpillar) ==
          std::vector<std::pair<std::string, std::string>>{{"a", "b"}, {"d", "e"}});
}

TEST_CASE("ls fit") {
    const DistanceMatrix d({"A", "B", "C"},
                           {0.0, 1.0, 2.0, 1.0, 0.0, 1.0, 2.0, 1.0, 0.0});
    CHECK(ls_fit(d, d) == doctest::Approx(100.0));

    const DistanceMatrix zero({"A", "B", "C"}, std::vector<double>(9, 0.0));
    CHECK(ls_fit(d, zero) == doctest::Approx(0.0));

    // Additive recovery fits at 100 within 1e-9.
    Rng rng(5);
    const TestTree gen = random_binary_tree(rng, 12);
    const DistanceMatrix metric = gen.metric();
    const double fit = ls_fit(metric, tree_distance_matrix(nj(metric)));
    CHECK(fit == doctest::Approx(100.0).epsilon(1e-11));

    const DistanceMatrix other({"A", "B", "X"},
                               {0.0, 1.0, 2.0, 1.0, 0.0, 1.0, 2.0, 1.0, 0.0});
    CHECK_THROWS_AS(ls_fit(d, other), Error);
}

TEST_CASE("newick quoting and parsing") {
    PhyloTree t;
    const int a = t.add_node("new taxon");
    const int b = t.add_node("plain");
    t.add_edge(a, b, 1.0);
    const std::string text = to_newick(t, 2);
    CHECK(text == "('new taxon':0.50,plain:0.50);");
    const PhyloTree back = parse_newick(text);
    CHECK(back.nodes()[0].label == "new taxon");

    const PhyloTree quoted = parse_newick("('it''s a (test)':1.5,x:2);");
    CHECK(quoted.nodes()[0].label == "it's a (test)");

    CHECK_THROWS_AS(parse_newick("(A:1,B:2"), Error);
    CHECK_THROWS_AS(parse_newick(""), Error);
}

TEST_CASE("newick round trips reproduce the metric and the bytes") {
    Rng rng(31);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 3 + rng.below(14);
        const TestTree gen = random_binary_tree(rng, n);
        const PhyloTree t = nj(gen.metric());
        const std::string text = to_newick(t, 9);
        const PhyloTree back = parse_newick(text);

        // Byte-identical re-serialization.
        CHECK(to_newick(back, 9) == text);

        // Metric reproduced to the serialization precision.
        const DistanceMatrix want = tree_distance_matrix(t);
        const DistanceMatrix got = tree_distance_matrix(back);
        REQUIRE(got.labels() == want.labels());
        for (std::size_t i = 0; i < want.size(); ++i)
            for (std::size_t j = 0; j < want.size(); ++j)
                CHECK(std::abs(got.at(i, j) - want.at(i, j)) < 1e-7);
    }
}
