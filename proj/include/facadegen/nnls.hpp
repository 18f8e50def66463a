#pragma once

#include <cstddef>
#include <vector>

namespace facadegen {

// Least-squares design seen through the operations the active-set solver
// needs. Implementations may exploit structure instead of materializing A.
class NnlsProblem {
public:
    virtual ~NnlsProblem() = default;

    virtual std::size_t size() const = 0;  // variable count
    virtual double gram(std::size_t i, std::size_t j) const = 0;   // (A^T A)(i,j)
    virtual double atb(std::size_t i) const = 0;                   // (A^T b)(i)
    // out = A^T (A w - b), full length.
    virtual void gradient(const std::vector<double>& w, std::vector<double>& out) const = 0;
    virtual double residual_norm(const std::vector<double>& w) const = 0;  // ||A w - b||
};

// Explicit row-major design, for small systems and tests.
class DenseNnls final : public NnlsProblem {
public:
    DenseNnls(std::size_t rows, std::size_t vars, std::vector<double> a_row_major,
              std::vector<double> b);

    std::size_t size() const override { return vars_; }
    double gram(std::size_t i, std::size_t j) const override;
    double atb(std::size_t i) const override;
    void gradient(const std::vector<double>& w, std::vector<double>& out) const override;
    double residual_norm(const std::vector<double>& w) const override;

private:
    std::size_t rows_ = 0, vars_ = 0;
    std::vector<double> a_, b_;
};

struct NnlsReport {
    std::size_t iterations = 0;
    double residual = 0.0;               // final ||A w - b||
    std::vector<double> residual_trace;  // one entry per active-set change
};

// Lawson-Hanson active set with an incrementally updated Cholesky factor of
// the passive-set Gram matrix. max_iter = 0 means 3 * size().
std::vector<double> nnls_solve(const NnlsProblem& problem, double tol = 1e-10,
                               std::size_t max_iter = 0, NnlsReport* report = nullptr);

}  // namespace facadegen
