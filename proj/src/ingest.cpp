#include "facadegen/ingest.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "facadegen/random.hpp"

namespace facadegen {
namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("io", "cannot read file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("io", "cannot write file '" + path + "'");
    out << text;
    if (!out) throw Error("io", "failed writing file '" + path + "'");
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            cells.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    cells.push_back(cur);
    return cells;
}

[[noreturn]] void parse_fail(const std::string& source, std::size_t line_no,
                             const std::string& what) {
    throw Error("parse", source + ":" + std::to_string(line_no) + ": " + what);
}

}  // namespace

TraitMatrix parse_trait_csv(const std::string& text, const std::string& source_name) {
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;

    if (!std::getline(in, line)) parse_fail(source_name, 1, "missing header row");
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto header = split_csv_line(line);
    if (header.empty() || header[0] != "building_id")
        parse_fail(source_name, line_no, "header must start with 'building_id'");
    TraitCatalog catalog(std::vector<std::string>(header.begin() + 1, header.end()));

    std::vector<std::string> taxa;
    std::vector<TraitVector> rows;
    std::unordered_set<std::string> seen;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto cells = split_csv_line(line);
        if (cells.size() != catalog.size() + 1)
            parse_fail(source_name, line_no,
                       "expected " + std::to_string(catalog.size() + 1) + " cells, got " +
                           std::to_string(cells.size()));
        if (cells[0].empty()) parse_fail(source_name, line_no, "empty building_id");
        if (!seen.insert(cells[0]).second)
            parse_fail(source_name, line_no, "duplicate building_id '" + cells[0] + "'");
        std::vector<std::uint8_t> bits(catalog.size());
        for (std::size_t k = 0; k < catalog.size(); ++k) {
            const std::string& cell = cells[k + 1];
            if (cell == "0")
                bits[k] = 0;
            else if (cell == "1")
                bits[k] = 1;
            else
                parse_fail(source_name, line_no, "cell '" + cell + "' is not 0 or 1");
        }
        taxa.push_back(cells[0]);
        rows.emplace_back(std::move(bits));
    }
    return TraitMatrix(std::move(catalog), std::move(taxa), std::move(rows));
}

TraitMatrix read_trait_csv(const std::string& path) {
    return parse_trait_csv(read_file(path), path);
}

std::string trait_csv_text(const TraitMatrix& m) {
    std::string out = "building_id";
    for (const auto& name : m.catalog().names()) {
        out += ',';
        out += name;
    }
    out += '\n';
    for (std::size_t i = 0; i < m.taxa_count(); ++i) {
        out += m.taxon(i);
        for (auto b : m.row(i).bits) {
            out += ',';
            out += b ? '1' : '0';
        }
        out += '\n';
    }
    return out;
}

void write_trait_csv(const TraitMatrix& m, const std::string& path) {
    write_file(path, trait_csv_text(m));
}

std::vector<DetectionRecord> parse_detections(const std::string& text,
                                              const std::string& source_name) {
    std::vector<DetectionRecord> out;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            parse_fail(source_name, line_no, std::string("invalid JSON: ") + e.what());
        }
        DetectionRecord r;
        try {
            r.image_id = j.at("image_id").get<std::string>();
            r.building_id = j.at("building_id").get<std::string>();
            r.class_name = j.at("class").get<std::string>();
            r.confidence = j.at("confidence").get<double>();
            const auto& bbox = j.at("bbox");
            if (!bbox.is_array() || bbox.size() != 4)
                parse_fail(source_name, line_no, "bbox must be an array [x,y,w,h]");
            r.x = bbox[0].get<double>();
            r.y = bbox[1].get<double>();
            r.width = bbox[2].get<double>();
            r.height = bbox[3].get<double>();
        } catch (const nlohmann::json::exception& e) {
            parse_fail(source_name, line_no, std::string("missing or invalid key: ") + e.what());
        }
        if (r.confidence < 0.0 || r.confidence > 1.0)
            parse_fail(source_name, line_no, "confidence must be in [0,1]");
        if (r.width <= 0.0 || r.height <= 0.0)
            parse_fail(source_name, line_no, "bbox width and height must be positive");
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<DetectionRecord> read_detections(const std::string& path) {
    return parse_detections(read_file(path), path);
}

TraitVector detections_to_vector(const std::vector<DetectionRecord>& records,
                                 const TraitCatalog& catalog, double tau) {
    // Building boxes per image; traits are gated only within their own image.
    std::unordered_map<std::string, std::vector<const DetectionRecord*>> building_boxes;
    for (const auto& r : records)
        if (r.class_name == kBuildingClass) building_boxes[r.image_id].push_back(&r);

    std::vector<std::uint8_t> bits(catalog.size(), 0);
    for (const auto& r : records) {
        if (r.class_name == kBuildingClass) continue;
        const int k = catalog.index_of(r.class_name);
        if (k < 0) throw Error("validation", "unknown detection class '" + r.class_name + "'");
        if (r.confidence < tau) continue;
        auto it = building_boxes.find(r.image_id);
        if (it != building_boxes.end()) {
            const double cx = r.x + r.width / 2.0;
            const double cy = r.y + r.height / 2.0;
            bool inside = false;
            for (const auto* b : it->second) {
                if (cx >= b->x && cx <= b->x + b->width && cy >= b->y &&
                    cy <= b->y + b->height) {
                    inside = true;
                    break;
                }
            }
            if (!inside) continue;
        }
        bits[static_cast<std::size_t>(k)] = 1;
    }
    return TraitVector(std::move(bits));
}

std::vector<BuildingRecord> detections_to_buildings(
    const std::vector<DetectionRecord>& records, const TraitCatalog& catalog, double tau) {
    std::vector<std::string> order;
    std::unordered_map<std::string, std::vector<DetectionRecord>> grouped;
    for (const auto& r : records) {
        auto [it, inserted] = grouped.try_emplace(r.building_id);
        if (inserted) order.push_back(r.building_id);
        it->second.push_back(r);
    }
    std::vector<BuildingRecord> out;
    out.reserve(order.size());
    for (const auto& id : order) {
        BuildingRecord b;
        b.building_id = id;
        b.vector = detections_to_vector(grouped[id], catalog, tau);
        std::unordered_set<std::string> images;
        for (const auto& r : grouped[id])
            if (images.insert(r.image_id).second) b.source_images.push_back(r.image_id);
        b.variant_flag = b.vector.all_zero();
        out.push_back(std::move(b));
    }
    return out;
}

TypeDerivation derive_types(const std::vector<BuildingRecord>& buildings,
                            std::size_t threshold) {
    if (threshold < 1) throw Error("validation", "type threshold must be >= 1");
    TypeDerivation out;
    out.catalog.threshold = threshold;

    std::map<std::string, std::size_t> counts;  // bit string -> count
    for (const auto& b : buildings) {
        if (b.variant_flag || b.vector.all_zero()) {
            out.variant_ids.push_back(b.building_id);
            continue;
        }
        ++counts[b.vector.to_string()];
    }

    std::vector<std::pair<std::string, std::size_t>> kept;
    for (const auto& [bits, count] : counts)
        if (count >= threshold) kept.emplace_back(bits, count);
    std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    for (std::size_t i = 0; i < kept.size(); ++i)
        out.catalog.entries.push_back({static_cast<int>(i) + 1,
                                       TraitVector::from_string(kept[i].first),
                                       kept[i].second});

    for (const auto& b : buildings) {
        if (b.variant_flag || b.vector.all_zero()) continue;
        if (counts[b.vector.to_string()] < threshold) out.leftover_ids.push_back(b.building_id);
    }
    return out;
}

std::string type_catalog_csv(const TypeCatalog& catalog, const TraitCatalog& traits) {
    std::string out = "type_id,count";
    for (const auto& name : traits.names()) {
        out += ',';
        out += name;
    }
    out += '\n';
    for (const auto& e : catalog.entries) {
        out += std::to_string(e.type_id);
        out += ',';
        out += std::to_string(e.count);
        for (auto b : e.vector.bits) {
            out += ',';
            out += b ? '1' : '0';
        }
        out += '\n';
    }
    return out;
}

SplitAssignment stratified_split(
    const std::map<std::string, std::vector<std::string>>& class_instances,
    std::uint64_t seed, std::size_t rare_cutoff, SplitRatios rare_ratio,
    SplitRatios common_ratio) {
    for (const auto& r : {rare_ratio, common_ratio})
        if (r.train + r.validation + r.test != 100)
            throw Error("validation", "split ratios must sum to 100");

    SplitAssignment out;
    for (const auto& [cls, ids] : class_instances) {
        const auto& ratio = ids.size() < rare_cutoff ? rare_ratio : common_ratio;
        const std::size_t n = ids.size();
        const std::size_t n_train = n * static_cast<std::size_t>(ratio.train) / 100;
        const std::size_t n_val = n * static_cast<std::size_t>(ratio.validation) / 100;

        std::vector<std::string> shuffled = ids;
        Rng rng = Rng::keyed(seed, cls);
        rng.shuffle(shuffled);

        SplitAssignment::ClassSplit s;
        s.train.assign(shuffled.begin(), shuffled.begin() + n_train);
        s.validation.assign(shuffled.begin() + n_train, shuffled.begin() + n_train + n_val);
        s.test.assign(shuffled.begin() + n_train + n_val, shuffled.end());
        out.classes.emplace(cls, std::move(s));
    }
    return out;
}

}  // namespace facadegen
