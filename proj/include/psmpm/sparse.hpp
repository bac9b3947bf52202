#pragma once

#include "psmpm/basis.hpp"
#include "psmpm/constraints.hpp"

#include <memory>
#include <span>
#include <vector>

namespace psmpm {

/// CSR sparsity of a basis: f and g couple when they share an element.
/// Keeps, per element, the value positions of its local function block so
/// particle contributions scatter without searching.
class SparsePattern
{
  public:
    explicit SparsePattern(const BasisSet& basis);

    int rows() const { return static_cast<int>(row_start_.size()) - 1; }
    std::size_t nonzeros() const { return cols_.size(); }
    const std::vector<int>& row_start() const { return row_start_; }
    const std::vector<int>& cols() const { return cols_; }
    int diagonal_position(int row) const { return diag_[row]; }
    /// Value position of (element_functions(e)[a], element_functions(e)[b]).
    int position(int e, int a, int b) const { return local_[static_cast<std::size_t>(e) * nf2_ + a * nf_ + b]; }
    /// Position of (row, col), or -1 if outside the pattern.
    int find(int row, int col) const;

  private:
    int nf_ = 0;
    int nf2_ = 0;
    std::vector<int> row_start_;
    std::vector<int> cols_;
    std::vector<int> diag_;
    std::vector<int> local_;
};

class SparseMatrix
{
  public:
    SparseMatrix() = default;
    explicit SparseMatrix(std::shared_ptr<const SparsePattern> pattern)
        : pattern_(std::move(pattern)), values_(pattern_->nonzeros(), 0.0)
    {}

    const SparsePattern& pattern() const { return *pattern_; }
    int rows() const { return pattern_->rows(); }
    std::vector<double>& values() { return values_; }
    const std::vector<double>& values() const { return values_; }

    double at(int row, int col) const;
    void multiply(std::span<const double> x, std::span<double> y) const;
    std::vector<double> diagonal() const;
    std::vector<double> row_sums() const;

  private:
    std::shared_ptr<const SparsePattern> pattern_;
    std::vector<double> values_;
};

struct SolveReport
{
    int iterations = 0;
    double relative_residual = 0.0;
};

/// Jacobi-preconditioned conjugate gradient restricted to the affine
/// constraint set, started from the incoming x. Converges when the projected
/// residual drops below `tolerance` times the projected right-hand side;
/// throws SolverDiverged after `max_iterations` (default 10 n) or on a
/// breakdown.
SolveReport solve_cg(const SparseMatrix& a, std::span<const double> b, std::span<double> x,
                     const ConstrainedSpace& space, double tolerance = 1e-10, int max_iterations = -1);

/// Direct solve with a diagonal matrix. Constrained vertex blocks are
/// solved in their free directions.
void solve_diagonal(std::span<const double> diag, std::span<const double> b, std::span<double> x,
                    const ConstrainedSpace& space);

} // namespace psmpm
