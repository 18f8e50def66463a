#include "facadegen/neighbornet.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "facadegen/random.hpp"

namespace facadegen {

CircularOrdering::CircularOrdering(std::vector<std::size_t> cycle) : cycle_(std::move(cycle)) {
    const std::size_t n = cycle_.size();
    std::vector<bool> seen(n, false);
    for (std::size_t v : cycle_) {
        if (v >= n || seen[v])
            throw Error("validation", "cycle is not a permutation of the taxa");
        seen[v] = true;
    }
    if (n == 0) return;
    // Canonical form: rotate taxon 0 to the front, then orient so the second
    // element is the smaller of the two possible neighbors.
    const auto zero = std::find(cycle_.begin(), cycle_.end(), std::size_t{0});
    std::rotate(cycle_.begin(), zero, cycle_.end());
    if (n >= 3 && cycle_[1] > cycle_[n - 1]) std::reverse(cycle_.begin() + 1, cycle_.end());
}

bool Split::separates(std::size_t a, std::size_t b) const {
    const bool ina = std::binary_search(side.begin(), side.end(), a);
    const bool inb = std::binary_search(side.begin(), side.end(), b);
    return ina != inb;
}

bool splits_compatible(const Split& a, const Split& b, std::size_t n_taxa) {
    std::size_t inter = 0;
    std::size_t i = 0, j = 0;
    while (i < a.side.size() && j < b.side.size()) {
        if (a.side[i] < b.side[j])
            ++i;
        else if (a.side[i] > b.side[j])
            ++j;
        else {
            ++inter;
            ++i;
            ++j;
        }
    }
    const std::size_t na = a.side.size(), nb = b.side.size();
    return inter == 0 || na - inter == 0 || nb - inter == 0 ||
           n_taxa - na - nb + inter == 0;
}

DistanceMatrix SplitSystem::split_metric() const {
    const std::size_t n = taxa.size();
    std::vector<double> d(n * n, 0.0);
    std::vector<char> mask(n);
    for (const auto& s : splits) {
        std::fill(mask.begin(), mask.end(), 0);
        for (std::size_t t : s.side) mask[t] = 1;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                if (mask[i] != mask[j]) {
                    d[i * n + j] += s.weight;
                    d[j * n + i] += s.weight;
                }
    }
    return DistanceMatrix(taxa, std::move(d));
}

void SplitSystem::validate() const {
    const std::size_t n = taxa.size();
    if (ordering.size() != n)
        throw Error("validation", "ordering does not cover the taxa");
    std::vector<std::size_t> pos(n);
    for (std::size_t p = 0; p < n; ++p) pos[ordering.cycle()[p]] = p;

    std::set<std::vector<std::size_t>> seen;
    for (const auto& s : splits) {
        if (s.side.empty() || s.side.size() >= n)
            throw Error("validation", "split side must be a proper non-empty subset");
        if (!std::is_sorted(s.side.begin(), s.side.end()) ||
            std::adjacent_find(s.side.begin(), s.side.end()) != s.side.end())
            throw Error("validation", "split side must be sorted and unique");
        for (std::size_t t : s.side)
            if (t >= n) throw Error("validation", "split side references an unknown taxon");
        if (std::binary_search(s.side.begin(), s.side.end(), std::size_t{0}))
            throw Error("validation", "split side must exclude taxon 0");
        if (!(s.weight >= 0.0) || !std::isfinite(s.weight))
            throw Error("validation", "split weight must be non-negative and finite");
        if (!seen.insert(s.side).second)
            throw Error("validation", "duplicate split");
        // Arc check: the side's cycle positions must be contiguous.
        std::size_t lo = n, hi = 0;
        for (std::size_t t : s.side) {
            lo = std::min(lo, pos[t]);
            hi = std::max(hi, pos[t]);
        }
        if (hi - lo + 1 != s.side.size() || lo == 0)
            throw Error("validation", "split is not circular for the ordering");
    }
}

std::vector<Split> circular_splits(const CircularOrdering& ordering) {
    const std::size_t n = ordering.size();
    std::vector<Split> out;
    if (n < 2) return out;
    out.reserve(n * (n - 1) / 2);
    for (std::size_t lo = 1; lo < n; ++lo) {
        for (std::size_t hi = lo; hi < n; ++hi) {
            Split s;
            s.side.assign(ordering.cycle().begin() + static_cast<std::ptrdiff_t>(lo),
                          ordering.cycle().begin() + static_cast<std::ptrdiff_t>(hi) + 1);
            std::sort(s.side.begin(), s.side.end());
            out.push_back(std::move(s));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Agglomerative ordering
// ---------------------------------------------------------------------------

namespace {

// Working state for the agglomeration: nodes live in a growing distance
// table; reductions replace chains of three nodes by two and are replayed in
// reverse to expand the final short cycle back to all taxa.
struct Agglomerator {
    std::size_t cap;
    std::vector<double> dist;  // cap x cap
    std::vector<int> partner;  // cluster mate, -1 for singletons
    std::vector<int> taxon;    // original taxon index, -1 for merged nodes
    std::vector<int> act;      // active node ids, ascending
    int next_id;

    struct Reduction {
        int u, v, w;  // replaced chain, v in the middle
        int a, b;     // replacements, a on the u side
    };
    std::vector<Reduction> events;

    explicit Agglomerator(const DistanceMatrix& d) {
        const std::size_t n = d.size();
        cap = 5 * n + 8;
        dist.assign(cap * cap, 0.0);
        partner.assign(cap, -1);
        taxon.assign(cap, -1);
        for (std::size_t i = 0; i < n; ++i) {
            taxon[i] = static_cast<int>(i);
            act.push_back(static_cast<int>(i));
            for (std::size_t j = 0; j < n; ++j) dist[i * cap + j] = d.at(i, j);
        }
        next_id = static_cast<int>(n);
    }

    double& d(int i, int j) { return dist[static_cast<std::size_t>(i) * cap + j]; }
    double d(int i, int j) const { return dist[static_cast<std::size_t>(i) * cap + j]; }

    void deactivate(int id) { act.erase(std::find(act.begin(), act.end(), id)); }

    // Replace the chain u - v - w by two linked nodes.
    std::pair<int, int> reduce(int u, int v, int w) {
        const int a = next_id++;
        const int b = next_id++;
        for (int z : act) {
            if (z == u || z == v || z == w) continue;
            d(a, z) = d(z, a) = (2.0 / 3.0) * d(u, z) + (1.0 / 3.0) * d(v, z);
            d(b, z) = d(z, b) = (2.0 / 3.0) * d(w, z) + (1.0 / 3.0) * d(v, z);
        }
        d(a, b) = d(b, a) = (d(u, v) + d(v, w) + d(u, w)) / 3.0;
        deactivate(u);
        deactivate(v);
        deactivate(w);
        act.push_back(a);
        act.push_back(b);
        partner[a] = b;
        partner[b] = a;
        events.push_back({u, v, w, a, b});
        return {a, b};
    }

    // Clusters (singletons or linked pairs) listed ascending by smallest id.
    std::vector<std::vector<int>> clusters() const {
        std::vector<std::vector<int>> out;
        for (int id : act) {
            if (partner[id] == -1)
                out.push_back({id});
            else if (partner[id] > id)
                out.push_back({id, partner[id]});
        }
        return out;
    }

    double cluster_distance(const std::vector<int>& a, const std::vector<int>& b) const {
        double s = 0.0;
        for (int x : a)
            for (int y : b) s += d(x, y);
        return s / static_cast<double>(a.size() * b.size());
    }

    void step() {
        const auto cl = clusters();
        const std::size_t nc = cl.size();

        // Cluster pair minimizing the NJ criterion on averaged distances.
        std::vector<double> rowsum(nc, 0.0);
        std::vector<std::vector<double>> cd(nc, std::vector<double>(nc, 0.0));
        for (std::size_t i = 0; i < nc; ++i)
            for (std::size_t j = i + 1; j < nc; ++j) {
                cd[i][j] = cd[j][i] = cluster_distance(cl[i], cl[j]);
                rowsum[i] += cd[i][j];
                rowsum[j] += cd[i][j];
            }
        double best_q = std::numeric_limits<double>::infinity();
        std::size_t ca = 0, cb = 1;
        for (std::size_t i = 0; i < nc; ++i)
            for (std::size_t j = i + 1; j < nc; ++j) {
                const double q =
                    (static_cast<double>(nc) - 2.0) * cd[i][j] - rowsum[i] - rowsum[j];
                if (q < best_q) {
                    best_q = q;
                    ca = i;
                    cb = j;
                }
            }

        // Node pair within the chosen clusters, treating their members as
        // single-node clusters and everything else as whole clusters.
        const auto& A = cl[ca];
        const auto& B = cl[cb];
        const double mhat = static_cast<double>(nc - 2 + A.size() + B.size());
        auto node_rowsum = [&](int x) {
            double s = 0.0;
            for (std::size_t c = 0; c < nc; ++c) {
                if (c == ca || c == cb) continue;
                s += cluster_distance({x}, cl[c]);
            }
            for (int z : A)
                if (z != x) s += d(x, z);
            for (int z : B)
                if (z != x) s += d(x, z);
            return s;
        };
        double best_nq = std::numeric_limits<double>::infinity();
        int nx = A[0], ny = B[0];
        for (int x : A) {
            const double rx = node_rowsum(x);
            for (int y : B) {
                const double q = (mhat - 2.0) * d(x, y) - rx - node_rowsum(y);
                if (q < best_nq) {
                    best_nq = q;
                    nx = x;
                    ny = y;
                }
            }
        }

        const int px = partner[nx];
        const int py = partner[ny];
        if (px == -1 && py == -1) {
            partner[nx] = ny;
            partner[ny] = nx;
        } else if (px == -1) {
            reduce(nx, ny, py);  // chain nx - ny - py
        } else if (py == -1) {
            reduce(px, nx, ny);  // chain px - nx - ny
        } else {
            const auto [t1, t2] = reduce(px, nx, ny);  // chain px - nx - ny - py
            reduce(t1, t2, py);
        }
    }

    std::vector<std::size_t> run() {
        while (act.size() > 3) step();

        std::vector<int> cycle(act.begin(), act.end());
        for (auto it = events.rbegin(); it != events.rend(); ++it) {
            const auto& e = *it;
            const std::size_t len = cycle.size();
            const std::size_t ia = static_cast<std::size_t>(
                std::find(cycle.begin(), cycle.end(), e.a) - cycle.begin());
            std::vector<int> grown;
            grown.reserve(len + 1);
            if (cycle[(ia + 1) % len] == e.b) {
                for (std::size_t p = 0; p < len; ++p) {
                    if (p == ia) {
                        grown.push_back(e.u);
                        grown.push_back(e.v);
                        grown.push_back(e.w);
                    } else if (p != (ia + 1) % len) {
                        grown.push_back(cycle[p]);
                    }
                }
            } else {
                // b precedes a; expand reversed
                for (std::size_t p = 0; p < len; ++p) {
                    if (p == ia) {
                        grown.push_back(e.u);
                    } else if (cycle[p] == e.b) {
                        grown.push_back(e.w);
                        grown.push_back(e.v);
                    } else {
                        grown.push_back(cycle[p]);
                    }
                }
            }
            cycle = std::move(grown);
        }

        std::vector<std::size_t> taxa_cycle;
        taxa_cycle.reserve(cycle.size());
        for (int id : cycle) {
            if (taxon[id] < 0) throw Error("validation", "unexpanded node in final cycle");
            taxa_cycle.push_back(static_cast<std::size_t>(taxon[id]));
        }
        return taxa_cycle;
    }
};

}  // namespace

CircularOrdering nnet_ordering(const DistanceMatrix& d) {
    const std::size_t n = d.size();
    if (n == 0) throw Error("empty-input", "ordering requires a non-empty matrix");
    if (n < 4) {
        std::vector<std::size_t> identity(n);
        std::iota(identity.begin(), identity.end(), 0);
        return CircularOrdering(identity);
    }
    Agglomerator agg(d);
    return CircularOrdering(agg.run());
}

// ---------------------------------------------------------------------------
// NNLS over the full circular system
// ---------------------------------------------------------------------------

namespace {

// Design matrix of a full circular split system, accessed through O(1) Gram
// entries and O(n^2) matrix-vector products built on 2-D prefix sums.
//
// Positions are indices into the cycle; split (lo,hi) has side {lo..hi},
// 1 <= lo <= hi <= n-1, so the side never holds position 0. Split s
// separates the pair p < q in exactly one of two ways:
//   p inside:  lo <= p,  p <= hi <= q-1
//   q inside:  p+1 <= lo <= q,  hi >= q
class CircularDesign final : public NnlsProblem {
public:
    CircularDesign(const CircularOrdering& ordering, const DistanceMatrix& d)
        : n_(ordering.size()) {
        if (d.size() != n_)
            throw Error("dimension", "ordering does not cover the distance matrix");
        lo_.reserve(n_ * (n_ - 1) / 2);
        hi_.reserve(n_ * (n_ - 1) / 2);
        for (std::size_t lo = 1; lo < n_; ++lo)
            for (std::size_t hi = lo; hi < n_; ++hi) {
                lo_.push_back(lo);
                hi_.push_back(hi);
            }
        y_.assign(n_ * n_, 0.0);
        const auto& cyc = ordering.cycle();
        for (std::size_t p = 0; p < n_; ++p)
            for (std::size_t q = p + 1; q < n_; ++q)
                y_[p * n_ + q] = d.at(cyc[p], cyc[q]);
        py_ = prefix(y_);
        norm_b_ = 0.0;
        for (std::size_t p = 0; p < n_; ++p)
            for (std::size_t q = p + 1; q < n_; ++q) norm_b_ += y_[p * n_ + q] * y_[p * n_ + q];
    }

    std::size_t size() const override { return lo_.size(); }

    double gram(std::size_t i, std::size_t j) const override {
        const double l1 = static_cast<double>(lo_[i]), h1 = static_cast<double>(hi_[i]);
        const double l2 = static_cast<double>(lo_[j]), h2 = static_cast<double>(hi_[j]);
        const double inter = std::max(0.0, std::min(h1, h2) - std::max(l1, l2) + 1.0);
        const double sa = h1 - l1 + 1.0, sb = h2 - l2 + 1.0;
        const double nn = static_cast<double>(n_);
        return inter * (nn - sa - sb + inter) + (sa - inter) * (sb - inter);
    }

    double atb(std::size_t i) const override { return pair_sum(py_, lo_[i], hi_[i]); }

    void gradient(const std::vector<double>& w, std::vector<double>& out) const override {
        std::vector<double> resid = residual_grid(w);
        const std::vector<double> pr = prefix(resid);
        out.resize(size());
        for (std::size_t s = 0; s < size(); ++s) out[s] = pair_sum(pr, lo_[s], hi_[s]);
    }

    double residual_norm(const std::vector<double>& w) const override {
        const std::vector<double> resid = residual_grid(w);
        double ss = 0.0;
        for (std::size_t p = 0; p < n_; ++p)
            for (std::size_t q = p + 1; q < n_; ++q) ss += resid[p * n_ + q] * resid[p * n_ + q];
        return std::sqrt(ss);
    }

private:
    // Padded 2-D prefix sums: P[(i+1)*(n+1)+(j+1)] = sum of m[0..i][0..j].
    std::vector<double> prefix(const std::vector<double>& m) const {
        const std::size_t np = n_ + 1;
        std::vector<double> p(np * np, 0.0);
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = 0; j < n_; ++j)
                p[(i + 1) * np + (j + 1)] = m[i * n_ + j] + p[i * np + (j + 1)] +
                                            p[(i + 1) * np + j] - p[i * np + j];
        return p;
    }

    // Inclusive rectangle sum; empty when r1 > r2 or c1 > c2.
    double rect(const std::vector<double>& p, std::ptrdiff_t r1, std::ptrdiff_t r2,
                std::ptrdiff_t c1, std::ptrdiff_t c2) const {
        if (r1 > r2 || c1 > c2) return 0.0;
        const std::ptrdiff_t np = static_cast<std::ptrdiff_t>(n_) + 1;
        return p[static_cast<std::size_t>((r2 + 1) * np + (c2 + 1))] -
               p[static_cast<std::size_t>(r1 * np + (c2 + 1))] -
               p[static_cast<std::size_t>((r2 + 1) * np + c1)] +
               p[static_cast<std::size_t>(r1 * np + c1)];
    }

    // Sum of a pair grid over the pairs separated by split (lo,hi).
    double pair_sum(const std::vector<double>& p, std::size_t lo, std::size_t hi) const {
        const auto l = static_cast<std::ptrdiff_t>(lo), h = static_cast<std::ptrdiff_t>(hi);
        const auto last = static_cast<std::ptrdiff_t>(n_) - 1;
        return rect(p, l, h, h + 1, last) + rect(p, 0, l - 1, l, h);
    }

    // Upper-triangular grid of (model - y) over pairs p < q.
    std::vector<double> residual_grid(const std::vector<double>& w) const {
        const std::size_t np = n_ + 1;
        std::vector<double> wgrid(n_ * n_, 0.0);
        for (std::size_t s = 0; s < size(); ++s)
            if (w[s] != 0.0) wgrid[lo_[s] * n_ + hi_[s]] = w[s];
        const std::vector<double> pw = prefix(wgrid);
        (void)np;
        std::vector<double> resid(n_ * n_, 0.0);
        for (std::size_t p = 0; p < n_; ++p) {
            for (std::size_t q = p + 1; q < n_; ++q) {
                const auto pp = static_cast<std::ptrdiff_t>(p);
                const auto qq = static_cast<std::ptrdiff_t>(q);
                const auto last = static_cast<std::ptrdiff_t>(n_) - 1;
                const double model =
                    rect(pw, 1, pp, pp, qq - 1) + rect(pw, pp + 1, qq, qq, last);
                resid[p * n_ + q] = model - y_[p * n_ + q];
            }
        }
        return resid;
    }

    std::size_t n_;
    std::vector<std::size_t> lo_, hi_;
    std::vector<double> y_;   // pair targets, upper triangle
    std::vector<double> py_;  // prefix of y
    double norm_b_ = 0.0;
};

}  // namespace

std::vector<double> nnls_weights(const CircularOrdering& ordering, const DistanceMatrix& d,
                                 double tol, std::size_t max_iter, NnlsReport* report) {
    if (ordering.size() != d.size())
        throw Error("dimension", "ordering does not cover the distance matrix");
    if (d.size() < 2) return {};
    const CircularDesign design(ordering, d);
    return nnls_solve(design, tol, max_iter, report);
}

SplitSystem neighbor_net(const DistanceMatrix& d, double weight_threshold) {
    SplitSystem out;
    out.taxa = d.labels();
    out.ordering = nnet_ordering(d);
    if (d.size() < 2) return out;
    std::vector<Split> all = circular_splits(out.ordering);
    const std::vector<double> w = nnls_weights(out.ordering, d);
    for (std::size_t i = 0; i < all.size(); ++i) {
        if (w[i] >= weight_threshold) {
            all[i].weight = w[i];
            out.splits.push_back(std::move(all[i]));
        }
    }
    return out;
}

double delta_score(const DistanceMatrix& d, std::optional<std::size_t> sample,
                   std::uint64_t seed) {
    const std::size_t n = d.size();
    if (n < 4) throw Error("size", "delta score requires at least 4 taxa");

    auto quartet = [&](std::size_t i, std::size_t j, std::size_t k, std::size_t l) {
        const double s1 = d.at(i, j) + d.at(k, l);
        const double s2 = d.at(i, k) + d.at(j, l);
        const double s3 = d.at(i, l) + d.at(j, k);
        double m1 = s1, m2 = s2, m3 = s3;
        if (m1 < m2) std::swap(m1, m2);
        if (m2 < m3) std::swap(m2, m3);
        if (m1 < m2) std::swap(m1, m2);
        const double span = m1 - m3;
        if (span <= 1e-12 * m1) return 0.0;  // box-free quartet, exact or to noise
        return (m1 - m2) / span;
    };

    if (!sample && n <= 20) {
        double total = 0.0;
        std::size_t count = 0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                for (std::size_t k = j + 1; k < n; ++k)
                    for (std::size_t l = k + 1; l < n; ++l) {
                        total += quartet(i, j, k, l);
                        ++count;
                    }
        return total / static_cast<double>(count);
    }

    const std::size_t draws = sample.value_or(20000);
    Rng rng = Rng::keyed(seed, "delta-quartets");
    double total = 0.0;
    for (std::size_t t = 0; t < draws; ++t) {
        std::size_t q[4];
        std::size_t got = 0;
        while (got < 4) {
            const std::size_t v = static_cast<std::size_t>(rng.below(n));
            bool dup = false;
            for (std::size_t u = 0; u < got; ++u) dup |= q[u] == v;
            if (!dup) q[got++] = v;
        }
        total += quartet(q[0], q[1], q[2], q[3]);
    }
    return total / static_cast<double>(draws);
}

}  // namespace facadegen
