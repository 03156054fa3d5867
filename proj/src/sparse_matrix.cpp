#include "curvflow/sparse_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <ostream>

namespace curvflow {

Eigen::VectorXd SparseSymMatrix::row_sums() const {
    // Symmetric storage: column sums equal row sums.
    Eigen::VectorXd sums = Eigen::VectorXd::Zero(m_.rows());
    for (Eigen::Index j = 0; j < m_.outerSize(); ++j) {
        for (Storage::InnerIterator it(m_, j); it; ++it) sums[it.row()] += it.value();
    }
    return sums;
}

double SparseSymMatrix::max_abs() const {
    double best = 0.0;
    const auto* v = m_.valuePtr();
    for (Eigen::Index k = 0; k < m_.nonZeros(); ++k) best = std::max(best, std::abs(v[k]));
    return best;
}

bool SparseSymMatrix::same_pattern(const SparseSymMatrix& other) const {
    const auto& a = m_;
    const auto& b = other.m_;
    if (a.rows() != b.rows() || a.cols() != b.cols() || a.nonZeros() != b.nonZeros()) return false;
    return std::equal(a.outerIndexPtr(), a.outerIndexPtr() + a.outerSize() + 1, b.outerIndexPtr()) &&
           std::equal(a.innerIndexPtr(), a.innerIndexPtr() + a.nonZeros(), b.innerIndexPtr());
}

bool SparseSymMatrix::identical(const SparseSymMatrix& other) const {
    if (!same_pattern(other)) return false;
    return std::memcmp(m_.valuePtr(), other.m_.valuePtr(), sizeof(double) * static_cast<std::size_t>(m_.nonZeros())) == 0;
}

SparseSymMatrix combine(double alpha, const SparseSymMatrix& a, double beta, const SparseSymMatrix& b) {
    if (a.same_pattern(b)) {
        SparseSymMatrix out = a;
        auto* dst = out.storage().valuePtr();
        const auto* va = a.storage().valuePtr();
        const auto* vb = b.storage().valuePtr();
        for (Eigen::Index k = 0; k < a.non_zeros(); ++k) dst[k] = alpha * va[k] + beta * vb[k];
        return out;
    }
    SparseSymMatrix::Storage sum = alpha * a.storage() + beta * b.storage();
    return SparseSymMatrix(std::move(sum));
}

void write_coordinate(std::ostream& out, const SparseSymMatrix& m) {
    const auto precision = out.precision(17);
    const auto& s = m.storage();
    for (Eigen::Index j = 0; j < s.outerSize(); ++j) {
        for (SparseSymMatrix::Storage::InnerIterator it(s, j); it; ++it) {
            out << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
        }
    }
    out.precision(precision);
}

}  // namespace curvflow
