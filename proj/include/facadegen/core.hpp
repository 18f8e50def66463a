#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace facadegen {

// Error with a machine-readable category. The CLI maps these to
// "error:<category>: <message>" lines and nonzero exit codes.
class Error : public std::runtime_error {
public:
    Error(std::string category, const std::string& message)
        : std::runtime_error(message), category_(std::move(category)) {}

    const std::string& category() const noexcept { return category_; }

private:
    std::string category_;
};

// Ordered, unique trait names. Position in the catalog defines the bit
// position in every TraitVector built against it.
class TraitCatalog {
public:
    TraitCatalog() = default;
    explicit TraitCatalog(std::vector<std::string> names);

    std::size_t size() const noexcept { return names_.size(); }
    const std::vector<std::string>& names() const noexcept { return names_; }
    const std::string& name(std::size_t i) const { return names_.at(i); }

    // Index of a trait name, or -1 if absent.
    int index_of(const std::string& name) const;

    bool operator==(const TraitCatalog&) const = default;

private:
    std::vector<std::string> names_;
};

// Fixed-length presence/absence vector; entries are 0 or 1.
struct TraitVector {
    std::vector<std::uint8_t> bits;

    TraitVector() = default;
    explicit TraitVector(std::vector<std::uint8_t> b);

    std::size_t size() const noexcept { return bits.size(); }
    bool all_zero() const noexcept;

    // Bit string, e.g. "10110".
    std::string to_string() const;
    static TraitVector from_string(const std::string& s);

    bool operator==(const TraitVector&) const = default;
    bool operator<(const TraitVector& o) const { return bits < o.bits; }
};

// Taxa-by-traits binary matrix. Row order follows the taxa list.
class TraitMatrix {
public:
    TraitMatrix() = default;
    TraitMatrix(TraitCatalog catalog, std::vector<std::string> taxa,
                std::vector<TraitVector> rows);

    std::size_t taxa_count() const noexcept { return taxa_.size(); }
    std::size_t trait_count() const noexcept { return catalog_.size(); }
    const TraitCatalog& catalog() const noexcept { return catalog_; }
    const std::vector<std::string>& taxa() const noexcept { return taxa_; }
    const std::vector<TraitVector>& rows() const noexcept { return rows_; }
    const TraitVector& row(std::size_t i) const { return rows_.at(i); }
    const std::string& taxon(std::size_t i) const { return taxa_.at(i); }

    // New matrix with rows permuted; taxa labels follow their rows.
    TraitMatrix reordered(const std::vector<std::size_t>& order) const;

    bool operator==(const TraitMatrix&) const = default;

private:
    TraitCatalog catalog_;
    std::vector<std::string> taxa_;
    std::vector<TraitVector> rows_;
};

// Dense symmetric dissimilarity matrix with zero diagonal.
class DistanceMatrix {
public:
    DistanceMatrix() = default;
    DistanceMatrix(std::vector<std::string> labels, std::vector<double> values);

    std::size_t size() const noexcept { return labels_.size(); }
    const std::vector<std::string>& labels() const noexcept { return labels_; }
    double at(std::size_t i, std::size_t j) const {
        return values_[i * labels_.size() + j];
    }
    const std::vector<double>& values() const noexcept { return values_; }

private:
    std::vector<std::string> labels_;
    std::vector<double> values_;  // row-major, size n*n
};

enum class Metric { Hamming, HammingNormalized, Jaccard };

// Accepts "hamming", "hamming-normalized", "jaccard".
Metric parse_metric(const std::string& name);
std::string metric_name(Metric m);

// Count of differing positions; divided by length when normalized.
double hamming_distance(const TraitVector& a, const TraitVector& b,
                        bool normalized = false);

// 1 - |a&b|/|a|b|; 0 when both vectors are all-zero.
double jaccard_distance(const TraitVector& a, const TraitVector& b);

DistanceMatrix distance_matrix(const TraitMatrix& m, Metric metric);

struct TraitFrequency {
    std::string trait;
    std::size_t count = 0;
    double percentage = 0.0;  // count / taxa * 100
};

std::vector<TraitFrequency> trait_frequencies(const TraitMatrix& m);

// Pairwise phi coefficient (Pearson on binary columns). Entries touching a
// constant column are 0, including that column's diagonal, and the column is
// flagged.
struct PhiMatrix {
    std::size_t traits = 0;
    std::vector<double> values;        // row-major, traits*traits
    std::vector<bool> constant_column;

    double at(std::size_t i, std::size_t j) const { return values[i * traits + j]; }
};

PhiMatrix phi_correlation(const TraitMatrix& m);

}  // namespace facadegen
