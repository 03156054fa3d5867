#include <cmath>
#include <string>

#include "curvflow/cholesky.hpp"
#include "curvflow/errors.hpp"

namespace curvflow {

Eigen::MatrixXd solve_cg(const SparseSymMatrix& a, const Eigen::Ref<const Eigen::MatrixXd>& rhs, double tol,
                         std::size_t max_iter) {
    const auto& m = a.storage();
    if (rhs.rows() != m.rows()) {
        throw DimensionMismatch("right-hand side has " + std::to_string(rhs.rows()) + " rows, system has " +
                                std::to_string(m.rows()));
    }
    const Eigen::VectorXd diag = m.diagonal();
    for (Eigen::Index i = 0; i < diag.size(); ++i) {
        if (!(diag[i] > 0.0)) throw Breakdown(0, diag[i]);
    }
    const Eigen::VectorXd inv_diag = diag.cwiseInverse();

    Eigen::MatrixXd out(rhs.rows(), rhs.cols());
    for (Eigen::Index c = 0; c < rhs.cols(); ++c) {
        const Eigen::VectorXd b = rhs.col(c);
        const double b_norm = b.norm();
        Eigen::VectorXd x = Eigen::VectorXd::Zero(b.size());
        if (b_norm == 0.0) {
            out.col(c) = x;
            continue;
        }
        Eigen::VectorXd r = b;
        Eigen::VectorXd z = inv_diag.cwiseProduct(r);
        Eigen::VectorXd p = z;
        double rz = r.dot(z);
        double rel = 1.0;
        std::size_t it = 0;
        for (; it < max_iter; ++it) {
            const Eigen::VectorXd ap = m * p;
            const double curvature = p.dot(ap);
            if (!(curvature > 0.0)) throw Breakdown(it, curvature);
            const double alpha = rz / curvature;
            x += alpha * p;
            r -= alpha * ap;
            rel = r.norm() / b_norm;
            if (rel <= tol) {
                // The recurrence drifts from the true residual; confirm it
                // and restart from the true residual if needed.
                r = b - m * x;
                rel = r.norm() / b_norm;
                if (rel <= tol) break;
                z = inv_diag.cwiseProduct(r);
                p = z;
                rz = r.dot(z);
                continue;
            }
            z = inv_diag.cwiseProduct(r);
            const double rz_next = r.dot(z);
            p = z + (rz_next / rz) * p;
            rz = rz_next;
        }
        if (rel > tol) throw MaxIterations(it, rel);
        out.col(c) = x;
    }
    return out;
}

}  // namespace curvflow
