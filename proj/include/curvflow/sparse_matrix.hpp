#pragma once

#include <iosfwd>

#include <Eigen/SparseCore>

namespace curvflow {

// Symmetric sparse matrix over mesh vertices. Both triangles are stored
// explicitly (column-major compressed) so products and column scans need no
// special casing. Assembly writes (i,j) and (j,i) from one computation, so
// values are exactly symmetric.
class SparseSymMatrix {
public:
    using Storage = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

    SparseSymMatrix() = default;
    explicit SparseSymMatrix(Storage m) : m_(std::move(m)) { m_.makeCompressed(); }

    [[nodiscard]] Eigen::Index size() const noexcept { return m_.rows(); }
    [[nodiscard]] Eigen::Index non_zeros() const noexcept { return m_.nonZeros(); }
    [[nodiscard]] const Storage& storage() const noexcept { return m_; }
    [[nodiscard]] Storage& storage() noexcept { return m_; }

    [[nodiscard]] double coeff(Eigen::Index i, Eigen::Index j) const { return m_.coeff(i, j); }
    [[nodiscard]] double sum() const { return m_.sum(); }
    [[nodiscard]] Eigen::VectorXd row_sums() const;
    [[nodiscard]] Eigen::VectorXd diagonal() const { return m_.diagonal(); }
    [[nodiscard]] double max_abs() const;

    [[nodiscard]] bool same_pattern(const SparseSymMatrix& other) const;
    // Bitwise equality of pattern and values.
    [[nodiscard]] bool identical(const SparseSymMatrix& other) const;

private:
    Storage m_;
};

// alpha * a + beta * b. Fast path when both share a pattern.
[[nodiscard]] SparseSymMatrix combine(double alpha, const SparseSymMatrix& a, double beta, const SparseSymMatrix& b);

// Coordinate text dump: one "i j value" line per stored entry, 17 digits.
void write_coordinate(std::ostream& out, const SparseSymMatrix& m);

}  // namespace curvflow
