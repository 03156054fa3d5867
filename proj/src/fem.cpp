#include "curvflow/fem.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "curvflow/errors.hpp"

namespace curvflow {
namespace {

void check_rows(const SparseSymMatrix& m, const Positions& x) {
    if (m.size() != x.rows()) {
        throw DimensionMismatch("matrix is " + std::to_string(m.size()) + "x" + std::to_string(m.size()) +
                                " but positions have " + std::to_string(x.rows()) + " rows");
    }
}

// Degeneracy test against the mean area of the active triangles.
void check_degenerate(const std::vector<double>& areas, const std::vector<bool>* active) {
    double mean = 0.0;
    std::size_t count = 0;
    for (std::size_t f = 0; f < areas.size(); ++f) {
        if (active && !(*active)[f]) continue;
        mean += areas[f];
        ++count;
    }
    if (count == 0) return;
    mean /= static_cast<double>(count);
    for (std::size_t f = 0; f < areas.size(); ++f) {
        if (active && !(*active)[f]) continue;
        if (!std::isfinite(areas[f]) || !(areas[f] > kDegenerateAreaRatio * mean)) throw DegenerateTriangle(f, areas[f]);
    }
}

}  // namespace

FemAssembler::FemAssembler(const TriMesh& mesh)
    : num_vertices_(mesh.num_vertices()), faces_(mesh.faces) {
    const auto n = static_cast<Eigen::Index>(num_vertices_);
    std::vector<Eigen::Triplet<double, int>> triplets;
    triplets.reserve(9 * faces_.size());
    for (const auto& f : faces_) {
        for (int a = 0; a < 3; ++a) {
            for (int b = 0; b < 3; ++b) triplets.emplace_back(f[a], f[b], 0.0);
        }
    }
    SparseSymMatrix::Storage s(n, n);
    s.setFromTriplets(triplets.begin(), triplets.end());
    s.makeCompressed();
    pattern_ = SparseSymMatrix(std::move(s));

    const auto& st = pattern_.storage();
    const int* outer = st.outerIndexPtr();
    const int* inner = st.innerIndexPtr();
    auto slot = [&](int row, int col) {
        const int* first = inner + outer[col];
        const int* last = inner + outer[col + 1];
        return static_cast<int>(std::lower_bound(first, last, row) - inner);
    };
    slots_.resize(faces_.size());
    for (std::size_t f = 0; f < faces_.size(); ++f) {
        for (int a = 0; a < 3; ++a) {
            for (int b = 0; b < 3; ++b) slots_[f][static_cast<std::size_t>(3 * a + b)] = slot(faces_[f][a], faces_[f][b]);
        }
    }
}

SparseSymMatrix FemAssembler::blank() const {
    SparseSymMatrix m = pattern_;
    std::fill(m.storage().valuePtr(), m.storage().valuePtr() + m.non_zeros(), 0.0);
    return m;
}

std::vector<double> FemAssembler::checked_areas(const Positions& positions) const {
    auto areas = triangle_areas(positions, faces_);
    check_degenerate(areas, nullptr);
    return areas;
}

SparseSymMatrix FemAssembler::mass(const Positions& positions) const {
    return mass(positions, std::vector<bool>(faces_.size(), true));
}

SparseSymMatrix FemAssembler::mass(const Positions& positions, const std::vector<bool>& active) const {
    if (static_cast<std::size_t>(positions.rows()) != num_vertices_) {
        throw DimensionMismatch("positions do not match the assembler's vertex count");
    }
    SparseSymMatrix m = blank();
    double* v = m.storage().valuePtr();
    for (std::size_t f = 0; f < faces_.size(); ++f) {
        if (!active[f]) continue;
        const auto& t = faces_[f];
        const double area = triangle_area(positions.row(t[0]).transpose(), positions.row(t[1]).transpose(),
                                          positions.row(t[2]).transpose());
        const auto& s = slots_[f];
        for (int a = 0; a < 3; ++a) {
            for (int b = 0; b < 3; ++b) v[s[static_cast<std::size_t>(3 * a + b)]] += (a == b ? area / 6.0 : area / 12.0);
        }
    }
    return m;
}

SparseSymMatrix FemAssembler::stiffness(const Positions& positions, const StiffnessOptions& options) const {
    return stiffness(positions, std::vector<bool>(faces_.size(), true), options);
}

SparseSymMatrix FemAssembler::stiffness(const Positions& positions, const std::vector<bool>& active,
                                        const StiffnessOptions& options) const {
    if (static_cast<std::size_t>(positions.rows()) != num_vertices_) {
        throw DimensionMismatch("positions do not match the assembler's vertex count");
    }
    check_degenerate(triangle_areas(positions, faces_), &active);

    SparseSymMatrix m = blank();
    double* v = m.storage().valuePtr();
    for (std::size_t f = 0; f < faces_.size(); ++f) {
        if (!active[f]) continue;
        const auto& t = faces_[f];
        const auto& s = slots_[f];
        for (int k = 0; k < 3; ++k) {
            // Angle at corner k is opposite edge (k+1, k+2).
            const int i = (k + 1) % 3;
            const int j = (k + 2) % 3;
            const Eigen::Vector3d p = positions.row(t[k]).transpose();
            double c = cotangent(positions.row(t[i]).transpose() - p, positions.row(t[j]).transpose() - p);
            if (!std::isfinite(c)) throw DegenerateTriangle(f, 0.0);
            if (options.cot_clamp > 0.0) c = std::clamp(c, -options.cot_clamp, options.cot_clamp);
            const double w = 0.5 * c;
            v[s[static_cast<std::size_t>(3 * i + j)]] += w;
            v[s[static_cast<std::size_t>(3 * j + i)]] += w;
            v[s[static_cast<std::size_t>(3 * i + i)]] -= w;
            v[s[static_cast<std::size_t>(3 * j + j)]] -= w;
        }
    }
    return m;
}

SparseSymMatrix assemble_mass(const TriMesh& mesh) { return FemAssembler(mesh).mass(mesh.vertices); }

SparseSymMatrix assemble_stiffness(const TriMesh& mesh, const StiffnessOptions& options) {
    return FemAssembler(mesh).stiffness(mesh.vertices, options);
}

double dirichlet_energy(const SparseSymMatrix& stiffness, const Positions& positions) {
    check_rows(stiffness, positions);
    const Positions lx = stiffness.storage() * positions;
    return -0.5 * (positions.array() * lx.array()).sum();
}

Positions dirichlet_gradient(const SparseSymMatrix& stiffness, const Positions& positions) {
    check_rows(stiffness, positions);
    return -(stiffness.storage() * positions);
}

}  // namespace curvflow
