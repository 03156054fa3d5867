#pragma once

#include <array>
#include <memory>
#include <vector>

#include "curvflow/mesh.hpp"
#include "curvflow/sparse_matrix.hpp"

namespace curvflow {

struct StiffnessOptions {
    // When > 0, every cotangent is clamped into [-cot_clamp, cot_clamp].
    // Off by default: unclamped weights are what lets a collapsing triangle
    // show up as a non-positive-definite system.
    double cot_clamp = 0.0;
};

// Hat-basis assembly on a fixed connectivity. The sparsity pattern
// {(i,j) : j in N(i)} plus the diagonal and the per-triangle scatter slots are
// computed once; every assemble call then only evaluates geometry.
class FemAssembler {
public:
    explicit FemAssembler(const TriMesh& mesh);

    [[nodiscard]] std::size_t num_vertices() const noexcept { return num_vertices_; }
    [[nodiscard]] std::span<const Face> faces() const noexcept { return faces_; }

    // Consistent mass matrix: D_ij = (|T1_ij| + |T2_ij|) / 12 off the
    // diagonal, D_ii = sum_k D_ik. Missing triangles on boundary edges count 0.
    [[nodiscard]] SparseSymMatrix mass(const Positions& positions) const;

    // Cotangent matrix: L_ij = (cot b1_ij + cot b2_ij) / 2, L_ii = -sum_k L_ik.
    // Throws DegenerateTriangle when a triangle's area is below
    // kDegenerateAreaRatio times the mean area (or not finite).
    [[nodiscard]] SparseSymMatrix stiffness(const Positions& positions, const StiffnessOptions& options = {}) const;

    // Throws DegenerateTriangle if any triangle is degenerate; returns areas.
    [[nodiscard]] std::vector<double> checked_areas(const Positions& positions) const;

    // Same as above but restricted to triangles whose `active` entry is true;
    // inactive triangles contribute nothing.
    [[nodiscard]] SparseSymMatrix mass(const Positions& positions, const std::vector<bool>& active) const;
    [[nodiscard]] SparseSymMatrix stiffness(const Positions& positions, const std::vector<bool>& active,
                                            const StiffnessOptions& options = {}) const;

private:
    SparseSymMatrix blank() const;

    std::size_t num_vertices_ = 0;
    std::vector<Face> faces_;
    SparseSymMatrix pattern_;
    // slots_[f][3 * a + b] = value index of entry (face[a], face[b]).
    std::vector<std::array<int, 9>> slots_;
};

[[nodiscard]] SparseSymMatrix assemble_mass(const TriMesh& mesh);
[[nodiscard]] SparseSymMatrix assemble_stiffness(const TriMesh& mesh, const StiffnessOptions& options = {});

// 1/2 sum over coordinate columns of x' (-L) x.
[[nodiscard]] double dirichlet_energy(const SparseSymMatrix& stiffness, const Positions& positions);
// (-L) x per coordinate column.
[[nodiscard]] Positions dirichlet_gradient(const SparseSymMatrix& stiffness, const Positions& positions);

// Cotangent of the angle between d0 and d1, via dot / |cross|.
[[nodiscard]] inline double cotangent(const Eigen::Vector3d& d0, const Eigen::Vector3d& d1) {
    return d0.dot(d1) / d0.cross(d1).norm();
}

}  // namespace curvflow
