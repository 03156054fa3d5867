#pragma once

#include <memory>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "curvflow/sparse_matrix.hpp"

namespace curvflow {

// A pivot at or below this fraction of the largest diagonal entry marks the
// matrix as not positive definite.
inline constexpr double kPivotTolerance = 1e-13;

// Fill-reducing ordering, elimination tree and column layout of L for one
// sparsity pattern. Shared by every numeric factorization of a matrix with
// that pattern.
class CholeskySymbolic {
public:
    explicit CholeskySymbolic(const SparseSymMatrix& pattern);

    [[nodiscard]] Eigen::Index size() const noexcept { return n_; }
    [[nodiscard]] std::size_t factor_non_zeros() const noexcept { return static_cast<std::size_t>(col_ptr_.back()); }
    [[nodiscard]] bool matches(const SparseSymMatrix& a) const;

private:
    friend class Factorization;

    Eigen::Index n_ = 0;
    std::vector<int> order_;  // order_[k] = original row eliminated k-th
    std::vector<int> rank_;   // inverse of order_
    std::vector<int> parent_;  // elimination tree of the permuted matrix

    // Upper triangle of the permuted matrix, compressed by column, with the
    // index of each entry in the source matrix's value array.
    std::vector<int> upper_ptr_;
    std::vector<int> upper_row_;
    std::vector<int> upper_src_;

    std::vector<int> col_ptr_;  // column starts of L

    // Keep the source pattern to reject mismatched matrices.
    std::vector<int> src_outer_;
    std::vector<int> src_inner_;
};

// Sparse LL' factorization of a symmetric matrix in a fill-reducing order.
// Immutable once built; concurrent solves are safe.
class Factorization {
public:
    // Throws NotPositiveDefinite (pivot reported in original numbering).
    explicit Factorization(const SparseSymMatrix& a, std::shared_ptr<const CholeskySymbolic> symbolic = nullptr,
                           double pivot_tolerance = kPivotTolerance);

    [[nodiscard]] Eigen::Index size() const noexcept { return symbolic_->size(); }
    [[nodiscard]] const std::shared_ptr<const CholeskySymbolic>& symbolic() const noexcept { return symbolic_; }
    [[nodiscard]] std::span<const int> ordering() const noexcept { return symbolic_->order_; }

    // Solves A x = rhs column by column. Throws DimensionMismatch.
    [[nodiscard]] Eigen::MatrixXd solve(const Eigen::Ref<const Eigen::MatrixXd>& rhs) const;

    // P' L L' P in the original numbering, as a dense matrix (tests only).
    [[nodiscard]] Eigen::MatrixXd reconstruct() const;

    [[nodiscard]] const std::vector<double>& factor_values() const noexcept { return values_; }

private:
    std::shared_ptr<const CholeskySymbolic> symbolic_;
    std::vector<int> rows_;       // row indices of L, column-compressed
    std::vector<double> values_;  // values of L; diagonal first in each column
};

[[nodiscard]] inline Factorization factorize(const SparseSymMatrix& a) { return Factorization(a); }

[[nodiscard]] inline Eigen::MatrixXd solve(const Factorization& f, const Eigen::Ref<const Eigen::MatrixXd>& rhs) {
    return f.solve(rhs);
}

// Jacobi-preconditioned conjugate gradient, one right-hand side column at a
// time. Throws MaxIterations when the relative residual stays above `tol`,
// Breakdown when a search direction has p'Ap <= 0 (or the diagonal is not
// positive), DimensionMismatch on bad shapes.
[[nodiscard]] Eigen::MatrixXd solve_cg(const SparseSymMatrix& a, const Eigen::Ref<const Eigen::MatrixXd>& rhs,
                                       double tol, std::size_t max_iter);

}  // namespace curvflow
