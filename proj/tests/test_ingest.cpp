#include <doctest.h>

#include <map>
#include <set>

#include "facadegen/ingest.hpp"
#include "facadegen/random.hpp"

using namespace facadegen;

namespace {

DetectionRecord det(const std::string& image, const std::string& building,
                    const std::string& cls, double conf, double x, double y, double w,
                    double h) {
    return DetectionRecord{image, building, cls, conf, x, y, w, h};
}

}  // namespace

TEST_CASE("trait csv parse and errors") {
    const TraitMatrix m = parse_trait_csv("building_id,a,b\nb1,1,0\n", "test");
    CHECK(m.taxa_count() == 1);
    CHECK(m.trait_count() == 2);
    CHECK(m.row(0) == TraitVector::from_string("10"));

    CHECK_THROWS_WITH_AS(
        parse_trait_csv("building_id,a\nb1,1\nb1,0\n", "test"),
        doctest::Contains("test:3"), Error);
    CHECK_THROWS_WITH_AS(parse_trait_csv("building_id,a\nb1,2\n", "test"),
                         doctest::Contains("test:2"), Error);
    CHECK_THROWS_AS(parse_trait_csv("id,a\nb1,1\n", "test"), Error);
    CHECK_THROWS_AS(parse_trait_csv("building_id,a\nb1,1,0\n", "test"), Error);
}

TEST_CASE("trait csv round trip is byte identical") {
    Rng rng(41);
    std::vector<std::string> traits;
    for (int k = 0; k < 14; ++k) traits.push_back("e" + std::to_string(k + 1));
    std::vector<std::string> taxa;
    std::vector<TraitVector> rows;
    for (int i = 0; i < 50; ++i) {
        taxa.push_back("b" + std::to_string(i + 1));
        std::vector<std::uint8_t> bits(14);
        for (auto& b : bits) b = rng.bernoulli(0.5);
        rows.emplace_back(bits);
    }
    const TraitMatrix m(TraitCatalog(traits), taxa, rows);
    const std::string text = trait_csv_text(m);
    const TraitMatrix back = parse_trait_csv(text, "mem");
    CHECK(back == m);
    CHECK(trait_csv_text(back) == text);
}

TEST_CASE("detection vector rules") {
    const TraitCatalog catalog({"fanlight", "shades"});

    CHECK(detections_to_vector({}, catalog, 0.5) == TraitVector::from_string("00"));

    // One confident record, centered inside the building box.
    const auto v1 = detections_to_vector(
        {det("i1", "b1", "building", 0.99, 0, 0, 100, 100),
         det("i1", "b1", "fanlight", 0.9, 40, 40, 10, 10)},
        catalog, 0.5);
    CHECK(v1 == TraitVector::from_string("10"));

    // Below the confidence floor.
    const auto v2 = detections_to_vector({det("i1", "b1", "fanlight", 0.3, 0, 0, 5, 5)},
                                         catalog, 0.5);
    CHECK(v2 == TraitVector::from_string("00"));

    // Center outside every building box of the same image.
    const auto v3 = detections_to_vector(
        {det("i1", "b1", "building", 0.99, 0, 0, 20, 20),
         det("i1", "b1", "shades", 0.9, 50, 50, 10, 10)},
        catalog, 0.5);
    CHECK(v3 == TraitVector::from_string("00"));

    // No building box in the record's image: no gating.
    const auto v4 = detections_to_vector(
        {det("i2", "b1", "building", 0.99, 0, 0, 20, 20),
         det("i1", "b1", "shades", 0.9, 50, 50, 10, 10)},
        catalog, 0.5);
    CHECK(v4 == TraitVector::from_string("01"));

    CHECK_THROWS_WITH_AS(
        detections_to_vector({det("i1", "b1", "gargoyle", 0.9, 0, 0, 5, 5)}, catalog, 0.5),
        doctest::Contains("gargoyle"), Error);
}

TEST_CASE("detection vector is monotone in the threshold") {
    const TraitCatalog catalog({"a", "b", "c"});
    Rng rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<DetectionRecord> recs;
        const int n = 1 + static_cast<int>(rng.below(6));
        for (int i = 0; i < n; ++i) {
            recs.push_back(det("i1", "b1", catalog.name(rng.below(3)), rng.uniform(), 0, 0,
                               10, 10));
        }
        const double t1 = rng.uniform();
        const double t2 = rng.uniform();
        const double lo = std::min(t1, t2), hi = std::max(t1, t2);
        const auto vlo = detections_to_vector(recs, catalog, lo);
        const auto vhi = detections_to_vector(recs, catalog, hi);
        for (std::size_t k = 0; k < 3; ++k) CHECK(vhi.bits[k] <= vlo.bits[k]);
    }
}

TEST_CASE("detection json parsing") {
    const std::string text =
        R"({"image_id":"i1","building_id":"b1","class":"building","confidence":0.9,"bbox":[0,0,100,50],"extra":1})"
        "\n"
        R"({"image_id":"i1","building_id":"b1","class":"fanlight","confidence":0.8,"bbox":[10,10,5,5]})"
        "\n";
    const auto recs = parse_detections(text, "dets");
    REQUIRE(recs.size() == 2);
    CHECK(recs[0].class_name == "building");
    CHECK(recs[1].confidence == doctest::Approx(0.8));

    CHECK_THROWS_WITH_AS(parse_detections("{bad json}\n", "dets"), doctest::Contains("dets:1"),
                         Error);
    CHECK_THROWS_AS(
        parse_detections(
            R"({"image_id":"i","building_id":"b","class":"x","confidence":1.5,"bbox":[0,0,1,1]})",
            "dets"),
        Error);
    CHECK_THROWS_AS(
        parse_detections(
            R"({"image_id":"i","building_id":"b","class":"x","confidence":0.5,"bbox":[0,0,0,1]})",
            "dets"),
        Error);
}

TEST_CASE("derive types") {
    std::vector<BuildingRecord> buildings;
    auto add = [&](const std::string& bits, int copies) {
        for (int c = 0; c < copies; ++c) {
            BuildingRecord b;
            b.building_id = "b" + std::to_string(buildings.size() + 1);
            b.vector = TraitVector::from_string(bits);
            b.variant_flag = b.vector.all_zero();
            buildings.push_back(b);
        }
    };
    add("10", 9);
    add("01", 8);
    add("11", 7);

    const TypeDerivation d = derive_types(buildings, 8);
    REQUIRE(d.catalog.entries.size() == 2);
    CHECK(d.catalog.entries[0].type_id == 1);
    CHECK(d.catalog.entries[0].vector == TraitVector::from_string("10"));
    CHECK(d.catalog.entries[0].count == 9);
    CHECK(d.catalog.entries[1].vector == TraitVector::from_string("01"));
    CHECK(d.leftover_ids.size() == 7);
    CHECK(d.variant_ids.empty());

    const TypeDerivation all = derive_types(buildings, 1);
    CHECK(all.catalog.entries.size() == 3);
    CHECK(all.leftover_ids.empty());
}

TEST_CASE("derive types excludes variants and keeps the count identity") {
    Rng rng(13);
    std::vector<BuildingRecord> buildings;
    for (int i = 0; i < 300; ++i) {
        BuildingRecord b;
        b.building_id = "b" + std::to_string(i + 1);
        std::vector<std::uint8_t> bits(4);
        for (auto& v : bits) v = rng.bernoulli(0.4);
        b.vector = TraitVector(bits);
        b.variant_flag = b.vector.all_zero();
        buildings.push_back(b);
    }
    const TypeDerivation d = derive_types(buildings, 8);
    std::size_t typed = 0;
    for (const auto& e : d.catalog.entries) typed += e.count;
    CHECK(typed + d.leftover_ids.size() + d.variant_ids.size() == buildings.size());

    // Ties in count order resolved by lexicographic bit string.
    for (std::size_t i = 1; i < d.catalog.entries.size(); ++i) {
        const auto& a = d.catalog.entries[i - 1];
        const auto& b = d.catalog.entries[i];
        const bool ordered = a.count > b.count ||
                             (a.count == b.count && a.vector.to_string() < b.vector.to_string());
        CHECK(ordered);
    }
}

TEST_CASE("type ids are stable under input reordering") {
    Rng rng(17);
    std::vector<BuildingRecord> buildings;
    for (int i = 0; i < 120; ++i) {
        BuildingRecord b;
        b.building_id = "b" + std::to_string(i + 1);
        std::vector<std::uint8_t> bits(3);
        for (auto& v : bits) v = rng.bernoulli(0.5);
        b.vector = TraitVector(bits);
        b.variant_flag = b.vector.all_zero();
        buildings.push_back(b);
    }
    std::vector<BuildingRecord> shuffled = buildings;
    rng.shuffle(shuffled);
    const TypeDerivation a = derive_types(buildings, 5);
    const TypeDerivation b = derive_types(shuffled, 5);
    REQUIRE(a.catalog.entries.size() == b.catalog.entries.size());
    for (std::size_t i = 0; i < a.catalog.entries.size(); ++i) {
        CHECK(a.catalog.entries[i].type_id == b.catalog.entries[i].type_id);
        CHECK(a.catalog.entries[i].vector == b.catalog.entries[i].vector);
        CHECK(a.catalog.entries[i].count == b.catalog.entries[i].count);
    }
}

TEST_CASE("stratified split sizes and determinism") {
    std::map<std::string, std::vector<std::string>> classes;
    for (int i = 0; i < 120; ++i) classes["rare"].push_back("r" + std::to_string(i));
    for (int i = 0; i < 1000; ++i) classes["common"].push_back("c" + std::to_string(i));
    classes["empty"] = {};

    const SplitAssignment s = stratified_split(classes, 99);
    CHECK(s.classes.at("rare").train.size() == 84);
    CHECK(s.classes.at("rare").validation.size() == 18);
    CHECK(s.classes.at("rare").test.size() == 18);
    CHECK(s.classes.at("common").train.size() == 800);
    CHECK(s.classes.at("common").validation.size() == 100);
    CHECK(s.classes.at("common").test.size() == 100);
    CHECK(s.classes.at("empty").train.empty());
    CHECK(s.classes.at("empty").test.empty());

    // n=7 rare: floor(4.9), floor(1.05), remainder.
    std::map<std::string, std::vector<std::string>> tiny;
    for (int i = 0; i < 7; ++i) tiny["x"].push_back(std::to_string(i));
    const SplitAssignment t = stratified_split(tiny, 1);
    CHECK(t.classes.at("x").train.size() == 4);
    CHECK(t.classes.at("x").validation.size() == 1);
    CHECK(t.classes.at("x").test.size() == 2);

    // Same seed, same bytes; different seed, (almost surely) different split.
    const SplitAssignment again = stratified_split(classes, 99);
    CHECK(again.classes.at("rare").train == s.classes.at("rare").train);
    const SplitAssignment other = stratified_split(classes, 100);
    CHECK(other.classes.at("rare").train != s.classes.at("rare").train);
}

TEST_CASE("stratified split partitions each class") {
    Rng rng(3);
    std::map<std::string, std::vector<std::string>> classes;
    for (int c = 0; c < 5; ++c) {
        const std::string name = "class" + std::to_string(c);
        const int n = 1 + static_cast<int>(rng.below(400));
        for (int i = 0; i < n; ++i) classes[name].push_back(name + ":" + std::to_string(i));
    }
    const SplitAssignment s = stratified_split(classes, 7);
    for (const auto& [name, ids] : classes) {
        const auto& cs = s.classes.at(name);
        std::set<std::string> all(ids.begin(), ids.end());
        std::set<std::string> seen;
        for (const auto* part : {&cs.train, &cs.validation, &cs.test})
            for (const auto& id : *part) CHECK(seen.insert(id).second);
        CHECK(seen == all);
    }

    CHECK_THROWS_AS(stratified_split(classes, 0, 200, {70, 15, 16}), Error);
}
