#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace curvflow {

// n x 3 vertex coordinates, one row per vertex.
using Positions = Eigen::Matrix<double, Eigen::Dynamic, 3>;
using Face = std::array<int, 3>;

enum VertexTag : std::uint8_t {
    kTagNone = 0,
    kTagBoundary = 1 << 0,
    kTagFrozen = 1 << 1,
};

// Indexed triangle surface. Faces are counter-clockwise when seen from the
// outside. `tags` is either empty or holds one VertexTag bitmask per vertex.
struct TriMesh {
    Positions vertices;
    std::vector<Face> faces;
    std::vector<std::uint8_t> tags;

    [[nodiscard]] std::size_t num_vertices() const noexcept { return static_cast<std::size_t>(vertices.rows()); }
    [[nodiscard]] std::size_t num_faces() const noexcept { return faces.size(); }

    [[nodiscard]] bool has_tag(std::size_t v, VertexTag tag) const noexcept {
        return v < tags.size() && (tags[v] & tag) != 0;
    }
};

// Ratio below which a triangle counts as degenerate, relative to the mean
// triangle area of the same mesh.
inline constexpr double kDegenerateAreaRatio = 1e-12;

[[nodiscard]] double triangle_area(const Eigen::Vector3d& a, const Eigen::Vector3d& b, const Eigen::Vector3d& c);

[[nodiscard]] std::vector<double> triangle_areas(const Positions& positions, std::span<const Face> faces);

// Sum of triangle areas. Zero-area triangles contribute 0; works on
// unvalidated meshes.
[[nodiscard]] double surface_area(const TriMesh& mesh);
[[nodiscard]] double surface_area(const Positions& positions, std::span<const Face> faces);

// Checks every TriMesh invariant: indices in range, no repeated vertex in a
// face, manifold edges with consistent orientation, no isolated vertices and
// strictly positive areas. Throws EmptyMesh or TopologyError.
void validate(const TriMesh& mesh);

// Area-weighted centroid of the surface (equals the barycenter weighted by
// row sums of the mass matrix).
[[nodiscard]] Eigen::Vector3d surface_centroid(const Positions& positions, std::span<const Face> faces);

[[nodiscard]] double bounding_box_diagonal(const Positions& positions);

}  // namespace curvflow
