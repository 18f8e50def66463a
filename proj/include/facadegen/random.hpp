#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace facadegen {

// Seeded generator with platform-stable helper draws. Library code must use
// these helpers rather than std::shuffle / std::uniform_*_distribution, whose
// output sequences are implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // Independent stream for a (seed, domain) pair, so that e.g. per-class
    // shuffles do not interact.
    static Rng keyed(std::uint64_t seed, std::string_view domain) {
        std::uint64_t h = 1469598103934665603ULL;  // FNV-1a 64
        for (char c : domain) {
            h ^= static_cast<unsigned char>(c);
            h *= 1099511628211ULL;
        }
        return Rng(seed ^ h);
    }

    std::uint64_t next() { return engine_(); }

    // Uniform in [0, n). n must be > 0.
    std::uint64_t below(std::uint64_t n) { return engine_() % n; }

    // Uniform in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    bool bernoulli(double p) { return uniform() < p; }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i)
            std::swap(v[i - 1], v[below(i)]);
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace facadegen
