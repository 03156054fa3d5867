#include "curvflow/cholesky.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/OrderingMethods>

#include "curvflow/errors.hpp"

namespace curvflow {
namespace {

// Nonzero pattern of row k of L: the union of etree paths from the entries of
// column k of the upper triangle, stopping at k. Written to stack[top..n).
int row_pattern(int k, const std::vector<int>& upper_ptr, const std::vector<int>& upper_row,
                const std::vector<int>& parent, std::vector<int>& stack, std::vector<int>& mark) {
    const int n = static_cast<int>(parent.size());
    int top = n;
    mark[k] = k;
    for (int p = upper_ptr[k]; p < upper_ptr[k + 1]; ++p) {
        int i = upper_row[p];
        if (i > k) continue;
        int len = 0;
        // Climb until a marked node; the path is pushed in reverse.
        while (mark[i] != k) {
            stack[len++] = i;
            mark[i] = k;
            i = parent[i];
        }
        while (len > 0) stack[--top] = stack[--len];
    }
    return top;
}

}  // namespace

CholeskySymbolic::CholeskySymbolic(const SparseSymMatrix& pattern) : n_(pattern.size()) {
    const auto& a = pattern.storage();
    const int n = static_cast<int>(n_);

    Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, int> pinv;
    Eigen::AMDOrdering<int> amd;
    amd(a, pinv);
    order_.assign(pinv.indices().data(), pinv.indices().data() + n);
    rank_.assign(n, 0);
    for (int k = 0; k < n; ++k) rank_[order_[k]] = k;

    src_outer_.assign(a.outerIndexPtr(), a.outerIndexPtr() + n + 1);
    src_inner_.assign(a.innerIndexPtr(), a.innerIndexPtr() + a.nonZeros());

    // Upper triangle of the permuted matrix: entry (i, j) of the source lands
    // at (min, max) of (rank i, rank j); keep only i' <= j'.
    std::vector<int> count(n + 1, 0);
    for (int j = 0; j < n; ++j) {
        for (int p = src_outer_[j]; p < src_outer_[j + 1]; ++p) {
            const int ri = rank_[src_inner_[p]];
            const int rj = rank_[j];
            if (ri <= rj) ++count[rj + 1];
        }
    }
    upper_ptr_.assign(n + 1, 0);
    for (int k = 0; k < n; ++k) upper_ptr_[k + 1] = upper_ptr_[k] + count[k + 1];
    upper_row_.resize(upper_ptr_.back());
    upper_src_.resize(upper_ptr_.back());
    std::vector<int> fill(upper_ptr_.begin(), upper_ptr_.end() - 1);
    for (int j = 0; j < n; ++j) {
        for (int p = src_outer_[j]; p < src_outer_[j + 1]; ++p) {
            const int ri = rank_[src_inner_[p]];
            const int rj = rank_[j];
            if (ri > rj) continue;
            const int dst = fill[rj]++;
            upper_row_[dst] = ri;
            upper_src_[dst] = p;
        }
    }

    // Elimination tree with path compression through `ancestor`.
    parent_.assign(n, -1);
    std::vector<int> ancestor(n, -1);
    for (int k = 0; k < n; ++k) {
        for (int p = upper_ptr_[k]; p < upper_ptr_[k + 1]; ++p) {
            int i = upper_row_[p];
            while (i != -1 && i < k) {
                const int next = ancestor[i];
                ancestor[i] = k;
                if (next == -1) {
                    parent_[i] = k;
                    break;
                }
                i = next;
            }
        }
    }

    // Column counts of L from the row patterns.
    std::vector<int> colcount(n, 1);
    std::vector<int> stack(n), mark(n, -1);
    for (int k = 0; k < n; ++k) {
        const int top = row_pattern(k, upper_ptr_, upper_row_, parent_, stack, mark);
        for (int t = top; t < n; ++t) ++colcount[stack[t]];
    }
    col_ptr_.assign(n + 1, 0);
    for (int k = 0; k < n; ++k) col_ptr_[k + 1] = col_ptr_[k] + colcount[k];
}

bool CholeskySymbolic::matches(const SparseSymMatrix& a) const {
    const auto& s = a.storage();
    return s.rows() == n_ && s.nonZeros() == static_cast<Eigen::Index>(src_inner_.size()) &&
           std::equal(src_outer_.begin(), src_outer_.end(), s.outerIndexPtr()) &&
           std::equal(src_inner_.begin(), src_inner_.end(), s.innerIndexPtr());
}

Factorization::Factorization(const SparseSymMatrix& a, std::shared_ptr<const CholeskySymbolic> symbolic,
                             double pivot_tolerance)
    : symbolic_(std::move(symbolic)) {
    if (!symbolic_ || !symbolic_->matches(a)) symbolic_ = std::make_shared<const CholeskySymbolic>(a);
    const auto& sym = *symbolic_;
    const int n = static_cast<int>(sym.n_);
    const double* src = a.storage().valuePtr();

    double max_diag = 0.0;
    const Eigen::VectorXd diag = a.diagonal();
    for (int i = 0; i < n; ++i) max_diag = std::max(max_diag, std::abs(diag[i]));
    const double threshold = pivot_tolerance * max_diag;

    rows_.resize(sym.factor_non_zeros());
    values_.resize(sym.factor_non_zeros());
    std::vector<int> next(sym.col_ptr_.begin(), sym.col_ptr_.end() - 1);
    std::vector<double> x(n, 0.0);
    std::vector<int> stack(n), mark(n, -1);

    for (int k = 0; k < n; ++k) {
        const int top = row_pattern(k, sym.upper_ptr_, sym.upper_row_, sym.parent_, stack, mark);
        for (int p = sym.upper_ptr_[k]; p < sym.upper_ptr_[k + 1]; ++p) {
            x[sym.upper_row_[p]] = src[sym.upper_src_[p]];
        }
        double d = x[k];
        x[k] = 0.0;
        for (int t = top; t < n; ++t) {
            const int i = stack[t];
            const double lki = x[i] / values_[sym.col_ptr_[i]];
            x[i] = 0.0;
            for (int p = sym.col_ptr_[i] + 1; p < next[i]; ++p) {
                x[rows_[p]] -= values_[p] * lki;
            }
            d -= lki * lki;
            const int p = next[i]++;
            rows_[p] = k;
            values_[p] = lki;
        }
        if (!(d > threshold) || !std::isfinite(d)) {
            throw NotPositiveDefinite(static_cast<std::size_t>(sym.order_[k]), d);
        }
        const int p = next[k]++;
        rows_[p] = k;
        values_[p] = std::sqrt(d);
    }
}

Eigen::MatrixXd Factorization::solve(const Eigen::Ref<const Eigen::MatrixXd>& rhs) const {
    const auto& sym = *symbolic_;
    const int n = static_cast<int>(sym.n_);
    if (rhs.rows() != n) {
        throw DimensionMismatch("right-hand side has " + std::to_string(rhs.rows()) + " rows, system has " +
                                std::to_string(n));
    }
    Eigen::MatrixXd out(rhs.rows(), rhs.cols());
    std::vector<double> y(n);
    const auto& cp = sym.col_ptr_;
    for (Eigen::Index c = 0; c < rhs.cols(); ++c) {
        for (int k = 0; k < n; ++k) y[k] = rhs(sym.order_[k], c);
        // L y = b
        for (int j = 0; j < n; ++j) {
            y[j] /= values_[cp[j]];
            const double yj = y[j];
            for (int p = cp[j] + 1; p < cp[j + 1]; ++p) {
                y[rows_[p]] -= values_[p] * yj;
            }
        }
        // L' x = y
        for (int j = n - 1; j >= 0; --j) {
            double s = y[j];
            for (int p = cp[j] + 1; p < cp[j + 1]; ++p) {
                s -= values_[p] * y[rows_[p]];
            }
            y[j] = s / values_[cp[j]];
        }
        for (int k = 0; k < n; ++k) out(sym.order_[k], c) = y[k];
    }
    return out;
}

Eigen::MatrixXd Factorization::reconstruct() const {
    const auto& sym = *symbolic_;
    const auto n = sym.n_;
    Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        for (int p = sym.col_ptr_[j]; p < sym.col_ptr_[j + 1]; ++p) {
            l(rows_[p], j) = values_[p];
        }
    }
    const Eigen::MatrixXd permuted = l * l.transpose();
    Eigen::MatrixXd out(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            out(sym.order_[i], sym.order_[j]) = permuted(i, j);
        }
    }
    return out;
}

}  // namespace curvflow
