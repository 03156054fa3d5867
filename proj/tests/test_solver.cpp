#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "curvflow/cholesky.hpp"
#include "curvflow/errors.hpp"
#include "curvflow/fem.hpp"
#include "curvflow/shapes.hpp"
#include "support.hpp"

using namespace curvflow;
using namespace testsupport;

namespace {

SparseSymMatrix dense_to_sparse(const Eigen::MatrixXd& a) {
    return SparseSymMatrix(a.sparseView(0.0, 0.0));
}

// The flow systems D - dt L on a few meshes and step sizes.
std::vector<SparseSymMatrix> flow_systems() {
    std::vector<SparseSymMatrix> out;
    for (const TriMesh& m : {generate(icosphere_spec(3)), generate(dumbbell_spec()), torus(40, 16)}) {
        const auto d = assemble_mass(m);
        const auto l = assemble_stiffness(m);
        for (double dt : {1e-3, 1e-1}) out.push_back(combine(1.0, d, -dt, l));
    }
    return out;
}

double residual(const SparseSymMatrix& a, const Eigen::MatrixXd& x, const Eigen::MatrixXd& b) {
    return (a.storage() * x - b).norm() / b.norm();
}

}  // namespace

TEST_SUITE("solver") {
    TEST_CASE("small dense examples") {
        Eigen::Matrix2d a;
        a << 2, 1, 1, 2;
        const Factorization f = factorize(dense_to_sparse(a));
        const Eigen::MatrixXd x = solve(f, Eigen::Vector2d(3, 3));
        CHECK((x - Eigen::Vector2d(1, 1)).norm() < 1e-15);

        Eigen::Matrix2d indefinite;
        indefinite << 1, 2, 2, 1;
        CHECK_THROWS_AS((void)factorize(dense_to_sparse(indefinite)), NotPositiveDefinite);
    }

    TEST_CASE("identity solve returns the right-hand side") {
        for (int n : {1, 7, 100}) {
            const SparseSymMatrix id = dense_to_sparse(Eigen::MatrixXd::Identity(n, n));
            const Eigen::MatrixXd b = Eigen::MatrixXd::Random(n, 3);
            CHECK(solve(factorize(id), b) == b);
        }
    }

    TEST_CASE("pivot location is reported in original numbering") {
        Eigen::Matrix3d a;
        a << 4, 0, 0, 0, -1, 0, 0, 0, 4;
        try {
            (void)factorize(dense_to_sparse(a));
            FAIL("expected NotPositiveDefinite");
        } catch (const NotPositiveDefinite& e) {
            CHECK(e.pivot() == 1);
            CHECK(e.value() < 0.0);
        }
    }

    TEST_CASE("factor reconstructs the matrix") {
        std::mt19937_64 rng(31);
        const SparseSymMatrix a = random_spd(generate(icosphere_spec(2)), rng);
        const Factorization f(a);
        const Eigen::MatrixXd dense(a.storage());
        CHECK((f.reconstruct() - dense).norm() <= 1e-10 * dense.norm());
        CHECK(f.symbolic()->matches(a));
        std::vector<int> order(f.ordering().begin(), f.ordering().end());
        std::sort(order.begin(), order.end());
        for (int i = 0; i < static_cast<int>(order.size()); ++i) CHECK(order[static_cast<std::size_t>(i)] == i);
    }

    TEST_CASE("random SPD residual and multi column solves") {
        std::mt19937_64 rng(37);
        TriMesh m = grid(19, 9);  // 200 vertices
        REQUIRE(m.num_vertices() == 200);
        const SparseSymMatrix a = random_spd(m, rng);
        const Factorization f(a);
        const Eigen::MatrixXd b = Eigen::MatrixXd::Random(200, 3);
        const Eigen::MatrixXd x = f.solve(b);
        for (int c = 0; c < 3; ++c) {
            CHECK((a.storage() * x.col(c) - b.col(c)).norm() <= 1e-8 * b.col(c).norm());
            CHECK(f.solve(b.col(c)) == x.col(c));
        }
        CHECK_THROWS_AS((void)f.solve(Eigen::MatrixXd::Zero(5, 1)), DimensionMismatch);
    }

    TEST_CASE("factorization is deterministic and the symbolic part is shareable") {
        std::mt19937_64 rng(41);
        const SparseSymMatrix a = random_spd(generate(icosphere_spec(3)), rng);
        const Factorization f1(a);
        const Factorization f2(a);
        CHECK(f1.factor_values() == f2.factor_values());
        const Factorization f3(a, f1.symbolic());
        CHECK(f3.factor_values() == f1.factor_values());
        CHECK(f3.symbolic() == f1.symbolic());
    }

    TEST_CASE("shift makes a failing matrix factorable") {
        const TriMesh m = generate(icosphere_spec(2));
        const SparseSymMatrix l = assemble_stiffness(m);
        // L has a negative diagonal and -L is singular; -L + eps I is positive definite.
        CHECK_THROWS_AS((void)factorize(l), NotPositiveDefinite);
        const SparseSymMatrix lap = combine(-1.0, l, 0.0, l);
        CHECK_THROWS_AS((void)factorize(lap), NotPositiveDefinite);
        SparseSymMatrix::Storage id(l.size(), l.size());
        id.setIdentity();
        CHECK_NOTHROW((void)factorize(SparseSymMatrix(lap.storage() + 1e-6 * id)));
    }

    TEST_CASE("conjugate gradient basics") {
        Eigen::Matrix2d a;
        a << 2, 1, 1, 2;
        const Eigen::MatrixXd x = solve_cg(dense_to_sparse(a), Eigen::Vector2d(3, 3), 1e-12, 100);
        CHECK((x - Eigen::Vector2d(1, 1)).norm() < 1e-12);

        Eigen::Matrix2d indefinite;
        indefinite << 1, 2, 2, 1;
        CHECK_THROWS_AS((void)solve_cg(dense_to_sparse(indefinite), Eigen::Vector2d(1, 0), 1e-12, 100), Breakdown);
        Eigen::Matrix2d negative_diag;
        negative_diag << -1, 0, 0, 2;
        CHECK_THROWS_AS((void)solve_cg(dense_to_sparse(negative_diag), Eigen::Vector2d(1, 1), 1e-12, 100), Breakdown);

        std::mt19937_64 rng(43);
        const SparseSymMatrix big = random_spd(generate(icosphere_spec(3)), rng);
        CHECK_THROWS_AS((void)solve_cg(big, Eigen::VectorXd::Ones(big.size()), 1e-14, 2), MaxIterations);
        CHECK_THROWS_AS((void)solve_cg(big, Eigen::VectorXd::Ones(3), 1e-12, 10), DimensionMismatch);
    }

    TEST_CASE("direct and iterative solves agree on the SPD corpus") {
        std::mt19937_64 rng(47);
        std::vector<SparseSymMatrix> corpus = flow_systems();
        TriMesh m500 = grid(24, 19);  // 500 vertices
        REQUIRE(m500.num_vertices() == 500);
        corpus.push_back(random_spd(m500, rng));
        corpus.push_back(random_spd(generate(icosphere_spec(2)), rng));
        const double tol = 1e-12;
        for (const auto& a : corpus) {
            const Eigen::MatrixXd b = Eigen::MatrixXd::Random(a.size(), 3);
            const Eigen::MatrixXd direct = factorize(a).solve(b);
            const Eigen::MatrixXd iterative = solve_cg(a, b, tol, 50000);
            CHECK((direct - iterative).norm() <= std::max(tol, 1e-8) * direct.norm());
            CHECK(residual(a, direct, b) <= 1e-10);
        }
    }

    TEST_CASE("indefinite systems never return wrong answers") {
        std::mt19937_64 rng(53);
        const SparseSymMatrix base = random_spd(generate(icosphere_spec(1)), rng);
        const Eigen::MatrixXd dense(base.storage());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(dense);
        const double lo = eig.eigenvalues()(0);
        const double hi = eig.eigenvalues()(dense.rows() - 1);
        for (double frac : {0.01, 0.3, 0.9}) {
            const double shift = lo + frac * (hi - lo);
            SparseSymMatrix::Storage id(base.size(), base.size());
            id.setIdentity();
            const SparseSymMatrix a(base.storage() - shift * id);
            CHECK_THROWS_AS((void)factorize(a), NotPositiveDefinite);
            for (int trial = 0; trial < 5; ++trial) {
                const Eigen::VectorXd b = Eigen::VectorXd::Random(a.size());
                try {
                    const Eigen::MatrixXd x = solve_cg(a, b, 1e-10, 5000);
                    CHECK(residual(a, x, b) <= 1e-8);
                } catch (const Breakdown&) {
                } catch (const MaxIterations&) {
                }
            }
        }
    }
}
