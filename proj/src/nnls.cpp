#include "facadegen/nnls.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "facadegen/core.hpp"

namespace facadegen {

DenseNnls::DenseNnls(std::size_t rows, std::size_t vars, std::vector<double> a_row_major,
                     std::vector<double> b)
    : rows_(rows), vars_(vars), a_(std::move(a_row_major)), b_(std::move(b)) {
    if (a_.size() != rows_ * vars_ || b_.size() != rows_)
        throw Error("dimension", "design matrix shape mismatch");
}

double DenseNnls::gram(std::size_t i, std::size_t j) const {
    double s = 0.0;
    for (std::size_t r = 0; r < rows_; ++r) s += a_[r * vars_ + i] * a_[r * vars_ + j];
    return s;
}

double DenseNnls::atb(std::size_t i) const {
    double s = 0.0;
    for (std::size_t r = 0; r < rows_; ++r) s += a_[r * vars_ + i] * b_[r];
    return s;
}

void DenseNnls::gradient(const std::vector<double>& w, std::vector<double>& out) const {
    out.assign(vars_, 0.0);
    for (std::size_t r = 0; r < rows_; ++r) {
        double model = 0.0;
        for (std::size_t j = 0; j < vars_; ++j) model += a_[r * vars_ + j] * w[j];
        const double res = model - b_[r];
        for (std::size_t j = 0; j < vars_; ++j) out[j] += a_[r * vars_ + j] * res;
    }
}

double DenseNnls::residual_norm(const std::vector<double>& w) const {
    double ss = 0.0;
    for (std::size_t r = 0; r < rows_; ++r) {
        double model = 0.0;
        for (std::size_t j = 0; j < vars_; ++j) model += a_[r * vars_ + j] * w[j];
        ss += (model - b_[r]) * (model - b_[r]);
    }
    return std::sqrt(ss);
}

namespace {

// Passive-set state: Gram lower triangle, its Cholesky factor, and A^T b,
// all indexed by position in `passive`.
struct ActiveSet {
    std::vector<std::size_t> passive;
    std::vector<std::vector<double>> gram_low;  // row i: entries j <= i
    std::vector<std::vector<double>> chol_low;
    std::vector<double> atb;

    std::size_t size() const { return passive.size(); }

    // Returns false when the new column is numerically dependent on the set.
    bool add(const NnlsProblem& p, std::size_t var) {
        const std::size_t k = size();
        std::vector<double> col(k + 1);
        for (std::size_t i = 0; i < k; ++i) col[i] = p.gram(passive[i], var);
        col[k] = p.gram(var, var);

        std::vector<double> v(k);
        for (std::size_t i = 0; i < k; ++i) {
            double s = col[i];
            for (std::size_t t = 0; t < i; ++t) s -= chol_low[i][t] * v[t];
            v[i] = s / chol_low[i][i];
        }
        double diag2 = col[k];
        for (double x : v) diag2 -= x * x;
        if (!(diag2 > 0.0) || !(diag2 > col[k] * 1e-12)) return false;

        v.push_back(std::sqrt(diag2));
        chol_low.push_back(std::move(v));
        gram_low.push_back(std::move(col));
        atb.push_back(p.atb(var));
        passive.push_back(var);
        return true;
    }

    void rebuild(const NnlsProblem& p) {
        const std::size_t k = size();
        gram_low.assign(k, {});
        chol_low.assign(k, {});
        atb.resize(k);
        for (std::size_t i = 0; i < k; ++i) {
            gram_low[i].resize(i + 1);
            for (std::size_t j = 0; j <= i; ++j) gram_low[i][j] = p.gram(passive[i], passive[j]);
            atb[i] = p.atb(passive[i]);
        }
        for (std::size_t i = 0; i < k; ++i) {
            chol_low[i].resize(i + 1);
            for (std::size_t j = 0; j <= i; ++j) {
                double s = gram_low[i][j];
                for (std::size_t t = 0; t < j; ++t) s -= chol_low[i][t] * chol_low[j][t];
                if (i == j) {
                    if (!(s > 0.0))
                        throw Error("convergence", "passive-set Gram matrix lost rank");
                    chol_low[i][i] = std::sqrt(s);
                } else {
                    chol_low[i][j] = s / chol_low[j][j];
                }
            }
        }
    }

    void remove(const NnlsProblem& p, const std::vector<std::size_t>& positions_desc) {
        for (std::size_t pos : positions_desc)
            passive.erase(passive.begin() + static_cast<std::ptrdiff_t>(pos));
        rebuild(p);
    }

    // Solve (A_P^T A_P) z = atb with one iterative-refinement pass.
    std::vector<double> solve() const {
        const std::size_t k = size();
        auto chol_solve = [&](const std::vector<double>& rhs) {
            std::vector<double> y(k), z(k);
            for (std::size_t i = 0; i < k; ++i) {
                double s = rhs[i];
                for (std::size_t t = 0; t < i; ++t) s -= chol_low[i][t] * y[t];
                y[i] = s / chol_low[i][i];
            }
            for (std::size_t i = k; i-- > 0;) {
                double s = y[i];
                for (std::size_t t = i + 1; t < k; ++t) s -= chol_low[t][i] * z[t];
                z[i] = s / chol_low[i][i];
            }
            return z;
        };
        std::vector<double> z = chol_solve(atb);
        std::vector<double> resid(k);
        for (std::size_t i = 0; i < k; ++i) {
            double s = atb[i];
            for (std::size_t j = 0; j < k; ++j)
                s -= (j <= i ? gram_low[i][j] : gram_low[j][i]) * z[j];
            resid[i] = s;
        }
        const std::vector<double> dz = chol_solve(resid);
        for (std::size_t i = 0; i < k; ++i) z[i] += dz[i];
        return z;
    }
};

}  // namespace

std::vector<double> nnls_solve(const NnlsProblem& problem, double tol, std::size_t max_iter,
                               NnlsReport* report) {
    const std::size_t m = problem.size();
    if (max_iter == 0) max_iter = 3 * m;

    std::vector<double> w(m, 0.0);
    std::vector<char> in_passive(m, 0);
    // Variables barred from (re-)entry until the iterate next moves: columns
    // the Cholesky update found dependent, and zero-step removals.
    std::vector<char> blocked(m, 0);
    ActiveSet set;

    std::size_t iters = 0;
    std::vector<double> grad(m);
    auto record = [&] {
        if (report) report->residual_trace.push_back(problem.residual_norm(w));
    };
    auto iteration_guard = [&] {
        if (++iters > max_iter)
            throw Error("convergence",
                        "nnls exceeded " + std::to_string(max_iter) + " iterations, residual=" +
                            std::to_string(problem.residual_norm(w)));
    };

    record();
    while (true) {
        iteration_guard();
        problem.gradient(w, grad);
        std::size_t best = m;
        bool saw_blocked_violation = false;
        for (std::size_t j = 0; j < m; ++j) {
            if (in_passive[j] || grad[j] >= -tol) continue;
            if (blocked[j]) {
                saw_blocked_violation = true;
                continue;
            }
            if (best == m || grad[j] < grad[best]) best = j;
        }
        if (best == m) {
            if (saw_blocked_violation)
                throw Error("convergence", "nnls stalled on a rank-deficient candidate set");
            break;  // KKT satisfied within tol
        }
        if (!set.add(problem, best)) {
            blocked[best] = 1;
            continue;
        }
        in_passive[best] = 1;

        // Inner loop: keep the passive weights strictly positive.
        while (set.size() > 0) {
            iteration_guard();
            const std::vector<double> z = set.solve();
            bool feasible = true;
            for (double v : z)
                if (v <= 0.0) feasible = false;
            if (feasible) {
                for (std::size_t i = 0; i < set.size(); ++i) w[set.passive[i]] = z[i];
                std::fill(blocked.begin(), blocked.end(), 0);
                break;
            }
            double alpha = 1.0;
            for (std::size_t i = 0; i < set.size(); ++i) {
                if (z[i] > 0.0) continue;
                const double wi = w[set.passive[i]];
                alpha = std::min(alpha, wi / (wi - z[i]));
            }
            std::vector<std::size_t> hit;  // positions reaching zero, descending
            for (std::size_t i = set.size(); i-- > 0;) {
                if (z[i] > 0.0) continue;
                const double wi = w[set.passive[i]];
                if (wi / (wi - z[i]) <= alpha * (1.0 + 1e-12)) hit.push_back(i);
            }
            const bool moved = alpha > 1e-14;
            if (moved) {
                for (std::size_t i = 0; i < set.size(); ++i) {
                    const std::size_t var = set.passive[i];
                    w[var] += alpha * (z[i] - w[var]);
                }
            }
            for (std::size_t pos : hit) {
                const std::size_t var = set.passive[pos];
                w[var] = 0.0;
                in_passive[var] = 0;
                if (!moved) blocked[var] = 1;
            }
            set.remove(problem, hit);
            if (moved) std::fill(blocked.begin(), blocked.end(), 0);
            record();
        }
        record();
    }

    if (report) {
        report->iterations = iters;
        report->residual = problem.residual_norm(w);
    }
    return w;
}

}  // namespace facadegen
