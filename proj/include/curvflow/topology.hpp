#pragma once

#include <optional>
#include <vector>

#include "curvflow/mesh.hpp"

namespace curvflow {

// Undirected edge (v0 < v1) with its one or two incident faces. `faces[1]`
// is -1 on boundary edges.
struct Edge {
    int v0 = -1;
    int v1 = -1;
    std::array<int, 2> faces{-1, -1};

    [[nodiscard]] bool is_boundary() const noexcept { return faces[1] < 0; }
};

struct MeshTopology {
    std::size_t num_vertices = 0;
    std::size_t num_faces = 0;
    std::vector<std::vector<int>> neighbors;  // N(i), sorted ascending
    std::vector<Edge> edges;                  // sorted by (v0, v1)
    std::vector<bool> boundary_vertex;
    int euler_characteristic = 0;
    std::size_t boundary_loops = 0;
    // (2 - chi - b) / 2 for an orientable surface with b boundary loops.
    int genus = 0;

    [[nodiscard]] std::size_t num_edges() const noexcept { return edges.size(); }
    [[nodiscard]] bool is_closed() const noexcept { return boundary_loops == 0; }
    // Index into `edges`, or nullopt when i and j are not adjacent.
    [[nodiscard]] std::optional<std::size_t> find_edge(int i, int j) const;
};

[[nodiscard]] MeshTopology analyze_topology(const TriMesh& mesh);

}  // namespace curvflow
