#include "curvflow/topology.hpp"

#include <algorithm>
#include <numeric>
#include <tuple>

namespace curvflow {

std::optional<std::size_t> MeshTopology::find_edge(int i, int j) const {
    if (i > j) std::swap(i, j);
    const auto it = std::lower_bound(edges.begin(), edges.end(), std::pair{i, j},
                                     [](const Edge& e, const std::pair<int, int>& key) {
                                         return std::pair{e.v0, e.v1} < key;
                                     });
    if (it == edges.end() || it->v0 != i || it->v1 != j) return std::nullopt;
    return static_cast<std::size_t>(it - edges.begin());
}

MeshTopology analyze_topology(const TriMesh& mesh) {
    MeshTopology topo;
    topo.num_vertices = mesh.num_vertices();
    topo.num_faces = mesh.num_faces();

    struct HalfEdge {
        int lo, hi, face;
    };
    std::vector<HalfEdge> half;
    half.reserve(3 * mesh.faces.size());
    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
        const auto& t = mesh.faces[f];
        for (int k = 0; k < 3; ++k) {
            const int a = t[k], b = t[(k + 1) % 3];
            half.push_back({std::min(a, b), std::max(a, b), static_cast<int>(f)});
        }
    }
    std::sort(half.begin(), half.end(), [](const HalfEdge& x, const HalfEdge& y) {
        return std::tie(x.lo, x.hi, x.face) < std::tie(y.lo, y.hi, y.face);
    });

    for (std::size_t k = 0; k < half.size();) {
        Edge e{half[k].lo, half[k].hi, {half[k].face, -1}};
        std::size_t next = k + 1;
        if (next < half.size() && half[next].lo == e.v0 && half[next].hi == e.v1) {
            e.faces[1] = half[next].face;
            ++next;
        }
        // Validated meshes never have a third face on one edge.
        while (next < half.size() && half[next].lo == e.v0 && half[next].hi == e.v1) ++next;
        topo.edges.push_back(e);
        k = next;
    }

    topo.neighbors.assign(topo.num_vertices, {});
    topo.boundary_vertex.assign(topo.num_vertices, false);
    // Union-find over boundary edges counts boundary loops.
    std::vector<int> parent(topo.num_vertices);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
        while (parent[static_cast<std::size_t>(x)] != x) {
            parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
            x = parent[static_cast<std::size_t>(x)];
        }
        return x;
    };
    for (const auto& e : topo.edges) {
        topo.neighbors[static_cast<std::size_t>(e.v0)].push_back(e.v1);
        topo.neighbors[static_cast<std::size_t>(e.v1)].push_back(e.v0);
        if (e.is_boundary()) {
            topo.boundary_vertex[static_cast<std::size_t>(e.v0)] = true;
            topo.boundary_vertex[static_cast<std::size_t>(e.v1)] = true;
            parent[static_cast<std::size_t>(find(e.v0))] = find(e.v1);
        }
    }
    for (auto& n : topo.neighbors) std::sort(n.begin(), n.end());

    std::size_t loops = 0;
    for (std::size_t v = 0; v < topo.num_vertices; ++v) {
        if (topo.boundary_vertex[v] && find(static_cast<int>(v)) == static_cast<int>(v)) ++loops;
    }
    topo.boundary_loops = loops;
    topo.euler_characteristic = static_cast<int>(topo.num_vertices) - static_cast<int>(topo.edges.size()) +
                                static_cast<int>(topo.num_faces);
    topo.genus = (2 - topo.euler_characteristic - static_cast<int>(loops)) / 2;
    return topo;
}

}  // namespace curvflow
