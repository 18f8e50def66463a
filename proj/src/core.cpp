#include "facadegen/core.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace facadegen {

TraitCatalog::TraitCatalog(std::vector<std::string> names) : names_(std::move(names)) {
    std::unordered_set<std::string> seen;
    for (const auto& n : names_) {
        if (n.empty()) throw Error("validation", "trait name must be non-empty");
        if (!seen.insert(n).second)
            throw Error("validation", "duplicate trait name '" + n + "'");
    }
}

int TraitCatalog::index_of(const std::string& name) const {
    auto it = std::find(names_.begin(), names_.end(), name);
    return it == names_.end() ? -1 : static_cast<int>(it - names_.begin());
}

TraitVector::TraitVector(std::vector<std::uint8_t> b) : bits(std::move(b)) {
    for (auto v : bits)
        if (v > 1) throw Error("validation", "trait bits must be 0 or 1");
}

bool TraitVector::all_zero() const noexcept {
    return std::all_of(bits.begin(), bits.end(), [](std::uint8_t b) { return b == 0; });
}

std::string TraitVector::to_string() const {
    std::string s(bits.size(), '0');
    for (std::size_t i = 0; i < bits.size(); ++i)
        if (bits[i]) s[i] = '1';
    return s;
}

TraitVector TraitVector::from_string(const std::string& s) {
    std::vector<std::uint8_t> b;
    b.reserve(s.size());
    for (char c : s) {
        if (c != '0' && c != '1')
            throw Error("parse", std::string("invalid bit character '") + c + "'");
        b.push_back(c == '1');
    }
    return TraitVector(std::move(b));
}

TraitMatrix::TraitMatrix(TraitCatalog catalog, std::vector<std::string> taxa,
                         std::vector<TraitVector> rows)
    : catalog_(std::move(catalog)), taxa_(std::move(taxa)), rows_(std::move(rows)) {
    if (taxa_.size() != rows_.size())
        throw Error("validation", "taxa count does not match row count");
    std::unordered_set<std::string> seen;
    for (const auto& t : taxa_)
        if (!seen.insert(t).second)
            throw Error("validation", "duplicate taxon label '" + t + "'");
    for (const auto& r : rows_)
        if (r.size() != catalog_.size())
            throw Error("dimension", "row length does not match catalog size");
}

TraitMatrix TraitMatrix::reordered(const std::vector<std::size_t>& order) const {
    if (order.size() != taxa_.size())
        throw Error("validation", "order length does not match taxa count");
    std::vector<std::string> taxa;
    std::vector<TraitVector> rows;
    taxa.reserve(order.size());
    rows.reserve(order.size());
    for (std::size_t i : order) {
        taxa.push_back(taxa_.at(i));
        rows.push_back(rows_.at(i));
    }
    return TraitMatrix(catalog_, std::move(taxa), std::move(rows));
}

DistanceMatrix::DistanceMatrix(std::vector<std::string> labels, std::vector<double> values)
    : labels_(std::move(labels)), values_(std::move(values)) {
    const std::size_t n = labels_.size();
    if (values_.size() != n * n)
        throw Error("dimension", "distance matrix must be square over its labels");
    for (std::size_t i = 0; i < n; ++i) {
        if (values_[i * n + i] != 0.0)
            throw Error("validation", "distance diagonal must be zero");
        for (std::size_t j = 0; j < n; ++j) {
            const double v = values_[i * n + j];
            if (!std::isfinite(v)) throw Error("validation", "distance must be finite");
            if (v < 0.0) throw Error("validation", "distance must be non-negative");
            if (v != values_[j * n + i])
                throw Error("validation", "distance matrix must be symmetric");
        }
    }
}

Metric parse_metric(const std::string& name) {
    if (name == "hamming") return Metric::Hamming;
    if (name == "hamming-normalized") return Metric::HammingNormalized;
    if (name == "jaccard") return Metric::Jaccard;
    throw Error("usage", "unknown metric '" + name +
                             "' (expected hamming, hamming-normalized or jaccard)");
}

std::string metric_name(Metric m) {
    switch (m) {
        case Metric::Hamming: return "hamming";
        case Metric::HammingNormalized: return "hamming-normalized";
        case Metric::Jaccard: return "jaccard";
    }
    return "?";
}

double hamming_distance(const TraitVector& a, const TraitVector& b, bool normalized) {
    if (a.size() != b.size())
        throw Error("dimension", "hamming distance requires equal-length vectors");
    std::size_t diff = 0;
    for (std::size_t i = 0; i < a.size(); ++i) diff += a.bits[i] != b.bits[i];
    if (!normalized) return static_cast<double>(diff);
    if (a.size() == 0) return 0.0;
    return static_cast<double>(diff) / static_cast<double>(a.size());
}

double jaccard_distance(const TraitVector& a, const TraitVector& b) {
    if (a.size() != b.size())
        throw Error("dimension", "jaccard distance requires equal-length vectors");
    std::size_t both = 0, either = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        both += a.bits[i] && b.bits[i];
        either += a.bits[i] || b.bits[i];
    }
    if (either == 0) return 0.0;  // two featureless vectors count as identical
    return 1.0 - static_cast<double>(both) / static_cast<double>(either);
}

DistanceMatrix distance_matrix(const TraitMatrix& m, Metric metric) {
    const std::size_t n = m.taxa_count();
    if (n == 0) throw Error("empty-input", "distance matrix requires a non-empty matrix");
    std::vector<double> d(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            double v = 0.0;
            switch (metric) {
                case Metric::Hamming: v = hamming_distance(m.row(i), m.row(j), false); break;
                case Metric::HammingNormalized:
                    v = hamming_distance(m.row(i), m.row(j), true);
                    break;
                case Metric::Jaccard: v = jaccard_distance(m.row(i), m.row(j)); break;
            }
            d[i * n + j] = v;
            d[j * n + i] = v;
        }
    }
    return DistanceMatrix(m.taxa(), std::move(d));
}

std::vector<TraitFrequency> trait_frequencies(const TraitMatrix& m) {
    if (m.taxa_count() == 0)
        throw Error("empty-input", "trait frequencies require a non-empty matrix");
    std::vector<TraitFrequency> out(m.trait_count());
    for (std::size_t k = 0; k < m.trait_count(); ++k) {
        std::size_t count = 0;
        for (const auto& r : m.rows()) count += r.bits[k];
        out[k].trait = m.catalog().name(k);
        out[k].count = count;
        out[k].percentage =
            100.0 * static_cast<double>(count) / static_cast<double>(m.taxa_count());
    }
    return out;
}

PhiMatrix phi_correlation(const TraitMatrix& m) {
    const std::size_t rows = m.taxa_count();
    const std::size_t t = m.trait_count();
    if (rows < 2) throw Error("insufficient-data", "phi correlation requires at least 2 rows");

    PhiMatrix phi;
    phi.traits = t;
    phi.values.assign(t * t, 0.0);
    phi.constant_column.assign(t, false);

    std::vector<std::size_t> ones(t, 0);
    for (std::size_t k = 0; k < t; ++k) {
        for (const auto& r : m.rows()) ones[k] += r.bits[k];
        phi.constant_column[k] = (ones[k] == 0 || ones[k] == rows);
    }

    for (std::size_t i = 0; i < t; ++i) {
        if (phi.constant_column[i]) continue;  // row/column stays 0, flagged
        phi.values[i * t + i] = 1.0;
        for (std::size_t j = i + 1; j < t; ++j) {
            if (phi.constant_column[j]) continue;
            std::size_t n11 = 0;
            for (const auto& r : m.rows()) n11 += r.bits[i] && r.bits[j];
            const double a = static_cast<double>(n11);
            const double b = static_cast<double>(ones[i] - n11);
            const double c = static_cast<double>(ones[j] - n11);
            const double d = static_cast<double>(rows - ones[i] - ones[j] + n11);
            const double denom = std::sqrt((a + b) * (c + d) * (a + c) * (b + d));
            const double v = (a * d - b * c) / denom;
            phi.values[i * t + j] = v;
            phi.values[j * t + i] = v;
        }
    }
    return phi;
}

}  // namespace facadegen
