#pragma once

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <Eigen/Dense>

#include "curvflow/fem.hpp"
#include "curvflow/mesh.hpp"

namespace testsupport {

using curvflow::Face;
using curvflow::Positions;
using curvflow::TriMesh;

// Flat grid over [0, w] x [0, h] with nx x ny cells, each split along the
// same diagonal; faces are counter-clockwise seen from +z.
inline TriMesh grid(int nx, int ny, double w = 1.0, double h = 1.0) {
    TriMesh m;
    m.vertices.resize((nx + 1) * (ny + 1), 3);
    for (int j = 0; j <= ny; ++j) {
        for (int i = 0; i <= nx; ++i) {
            m.vertices.row(j * (nx + 1) + i) << w * i / nx, h * j / ny, 0.0;
        }
    }
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const int a = j * (nx + 1) + i;
            const int b = a + 1;
            const int c = a + nx + 1;
            const int d = c + 1;
            m.faces.push_back({a, b, d});
            m.faces.push_back({a, d, c});
        }
    }
    return m;
}

inline TriMesh tetrahedron() {
    TriMesh m;
    m.vertices.resize(4, 3);
    m.vertices << 1, 1, 1, 1, -1, -1, -1, 1, -1, -1, -1, 1;
    m.faces = {{0, 1, 2}, {0, 3, 1}, {0, 2, 3}, {1, 3, 2}};
    return m;
}

// Unit cube [0,1]^3, two triangles per side, outward orientation.
inline TriMesh cube() {
    TriMesh m;
    m.vertices.resize(8, 3);
    for (int i = 0; i < 8; ++i) m.vertices.row(i) << (i & 1), (i >> 1) & 1, (i >> 2) & 1;
    const int quads[6][4] = {{0, 2, 3, 1}, {4, 5, 7, 6}, {0, 1, 5, 4}, {2, 6, 7, 3}, {0, 4, 6, 2}, {1, 3, 7, 5}};
    for (const auto& q : quads) {
        m.faces.push_back({q[0], q[1], q[2]});
        m.faces.push_back({q[0], q[2], q[3]});
    }
    return m;
}

// Torus with major radius R and minor radius r, nu x nv quads split in two.
inline TriMesh torus(int nu, int nv, double R = 2.0, double r = 0.7) {
    TriMesh m;
    m.vertices.resize(nu * nv, 3);
    const double pi = std::acos(-1.0);
    for (int i = 0; i < nu; ++i) {
        for (int j = 0; j < nv; ++j) {
            const double u = 2 * pi * i / nu;
            const double v = 2 * pi * j / nv;
            m.vertices.row(i * nv + j) << (R + r * std::cos(v)) * std::cos(u), (R + r * std::cos(v)) * std::sin(u),
                r * std::sin(v);
        }
    }
    auto id = [&](int i, int j) { return ((i + nu) % nu) * nv + (j + nv) % nv; };
    for (int i = 0; i < nu; ++i) {
        for (int j = 0; j < nv; ++j) {
            m.faces.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
            m.faces.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
        }
    }
    return m;
}

inline Positions jitter(const Positions& p, double amplitude, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-amplitude, amplitude);
    Positions out = p;
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
        for (int c = 0; c < 3; ++c) out(i, c) += u(rng);
    }
    return out;
}

inline Eigen::Matrix3d random_rotation(std::mt19937_64& rng) {
    std::normal_distribution<double> n;
    Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
    return q.normalized().toRotationMatrix();
}

inline Positions transform(const Positions& p, const Eigen::Matrix3d& a, const Eigen::RowVector3d& t) {
    Positions out = p * a.transpose();
    out.rowwise() += t;
    return out;
}

inline Positions random_positions(Eigen::Index n, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    Positions out(n, 3);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (int c = 0; c < 3; ++c) out(i, c) = g(rng);
    }
    return out;
}

// Dirichlet energy summed from dense per-element stiffness built from the
// Gram matrix of the edge vectors; shares no code with the cotangent path.
inline double element_dirichlet(const TriMesh& rest, const Positions& x) {
    double total = 0.0;
    for (const Face& f : rest.faces) {
        const Eigen::Vector3d p0 = rest.vertices.row(f[0]);
        const Eigen::Vector3d e1 = Eigen::Vector3d(rest.vertices.row(f[1])) - p0;
        const Eigen::Vector3d e2 = Eigen::Vector3d(rest.vertices.row(f[2])) - p0;
        Eigen::Matrix2d gram;
        gram << e1.dot(e1), e1.dot(e2), e1.dot(e2), e2.dot(e2);
        const double area = 0.5 * std::sqrt(gram.determinant());
        // Gradients of barycentric coordinates 1 and 2 in the ambient frame.
        Eigen::Matrix<double, 3, 2> edges;
        edges << e1, e2;
        const Eigen::Matrix<double, 3, 2> grads = edges * gram.inverse();
        Eigen::Matrix3d g;
        g.col(1) = grads.col(0);
        g.col(2) = grads.col(1);
        g.col(0) = -grads.col(0) - grads.col(1);
        const Eigen::Matrix3d k = area * g.transpose() * g;
        for (int c = 0; c < 3; ++c) {
            const Eigen::Vector3d v(x(f[0], c), x(f[1], c), x(f[2], c));
            total += 0.5 * v.dot(k * v);
        }
    }
    return total;
}

// Fresh empty directory under the system temp directory.
inline std::filesystem::path temp_dir(const std::string& name) {
    static std::atomic<int> counter{0};
    const auto dir = std::filesystem::temp_directory_path() /
                     ("curvflow_test_" + name + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

inline void spit(const std::filesystem::path& p, const std::string& text) {
    std::ofstream f(p, std::ios::binary);
    f << text;
}

inline double relative(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

// B'B + I where B has the vertex adjacency pattern of `m` and random values.
inline curvflow::SparseSymMatrix random_spd(const TriMesh& m, std::mt19937_64& rng) {
    using Storage = curvflow::SparseSymMatrix::Storage;
    Storage b = curvflow::assemble_mass(m).storage();
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int k = 0; k < b.nonZeros(); ++k) b.valuePtr()[k] = u(rng);
    Storage identity(b.rows(), b.cols());
    identity.setIdentity();
    return curvflow::SparseSymMatrix(Storage(Storage(b.transpose()) * b + identity));
}

}  // namespace testsupport
