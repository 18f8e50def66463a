#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "facadegen/core.hpp"

namespace facadegen {

// Reserved detection class that scopes, but never sets, trait bits.
inline constexpr const char* kBuildingClass = "building";

// One detector output box for one image.
struct DetectionRecord {
    std::string image_id;
    std::string building_id;
    std::string class_name;  // catalog trait or kBuildingClass
    double confidence = 0.0;  // in [0,1]
    double x = 0.0, y = 0.0, width = 0.0, height = 0.0;  // pixels, width/height > 0
};

struct BuildingRecord {
    std::string building_id;
    TraitVector vector;
    std::vector<std::string> source_images;
    bool variant_flag = false;  // true iff vector is all-zero
};

// Distinct trait vectors observed at least `threshold` times, numbered 1..N
// by descending count, ties by lexicographic bit string.
struct TypeCatalog {
    struct Entry {
        int type_id = 0;
        TraitVector vector;
        std::size_t count = 0;
    };
    std::vector<Entry> entries;
    std::size_t threshold = 0;
};

// Per-class train/validation/test partition of instance ids.
struct SplitAssignment {
    struct ClassSplit {
        std::vector<std::string> train, validation, test;
    };
    std::map<std::string, ClassSplit> classes;
};

// Trait CSV: header "building_id,<trait...>", body cells in {0,1}, LF endings.
TraitMatrix read_trait_csv(const std::string& path);
TraitMatrix parse_trait_csv(const std::string& text, const std::string& source_name);
void write_trait_csv(const TraitMatrix& m, const std::string& path);
std::string trait_csv_text(const TraitMatrix& m);

// Detection file: one JSON object per line with keys image_id, building_id,
// class, confidence, bbox [x,y,w,h]. Unknown keys ignored.
std::vector<DetectionRecord> read_detections(const std::string& path);
std::vector<DetectionRecord> parse_detections(const std::string& text,
                                              const std::string& source_name);

// Presence rule: bit k is set iff some record of trait k has confidence >= tau
// and, when the record's image carries any "building" box, the trait box
// center lies inside one of that image's "building" boxes.
TraitVector detections_to_vector(const std::vector<DetectionRecord>& records,
                                 const TraitCatalog& catalog, double tau);

// Group records by building_id and apply detections_to_vector to each group.
// Buildings are ordered by first appearance in the record stream.
std::vector<BuildingRecord> detections_to_buildings(
    const std::vector<DetectionRecord>& records, const TraitCatalog& catalog, double tau);

struct TypeDerivation {
    TypeCatalog catalog;
    std::vector<std::string> leftover_ids;  // non-variant buildings below threshold
    std::vector<std::string> variant_ids;   // all-zero buildings, excluded up front
};

// Count duplicate vectors among non-variant buildings and keep those with
// count >= threshold.
TypeDerivation derive_types(const std::vector<BuildingRecord>& buildings,
                            std::size_t threshold);

// Type catalog CSV: header "type_id,count,<trait...>".
std::string type_catalog_csv(const TypeCatalog& catalog, const TraitCatalog& traits);

struct SplitRatios {
    int train = 0, validation = 0, test = 0;  // percentages, sum to 100
};

// Classes with fewer than rare_cutoff instances use rare_ratio, the rest
// common_ratio. Sizes are floor(train), floor(validation), remainder; the
// membership comes from a per-class seeded shuffle.
SplitAssignment stratified_split(
    const std::map<std::string, std::vector<std::string>>& class_instances,
    std::uint64_t seed, std::size_t rare_cutoff = 200,
    SplitRatios rare_ratio = {70, 15, 15}, SplitRatios common_ratio = {80, 10, 10});

}  // namespace facadegen
