#include "curvflow/mesh.hpp"

#include <algorithm>
#include <map>
#include <string>
#include <utility>

#include "curvflow/errors.hpp"

namespace curvflow {

double triangle_area(const Eigen::Vector3d& a, const Eigen::Vector3d& b, const Eigen::Vector3d& c) {
    return 0.5 * (b - a).cross(c - a).norm();
}

std::vector<double> triangle_areas(const Positions& positions, std::span<const Face> faces) {
    std::vector<double> areas(faces.size());
    for (std::size_t f = 0; f < faces.size(); ++f) {
        const auto& t = faces[f];
        areas[f] = triangle_area(positions.row(t[0]).transpose(), positions.row(t[1]).transpose(),
                                 positions.row(t[2]).transpose());
    }
    return areas;
}

double surface_area(const Positions& positions, std::span<const Face> faces) {
    double total = 0.0;
    for (const auto& t : faces) {
        total += triangle_area(positions.row(t[0]).transpose(), positions.row(t[1]).transpose(),
                               positions.row(t[2]).transpose());
    }
    return total;
}

double surface_area(const TriMesh& mesh) { return surface_area(mesh.vertices, mesh.faces); }

void validate(const TriMesh& mesh) {
    const auto n = static_cast<int>(mesh.num_vertices());
    if (n == 0 || mesh.faces.empty()) throw EmptyMesh();
    if (!mesh.tags.empty() && mesh.tags.size() != mesh.num_vertices()) {
        throw TopologyError("vertex tag count does not match vertex count");
    }
    if (!mesh.vertices.allFinite()) throw TopologyError("non-finite vertex coordinate");

    // Directed edge -> owning face. A repeated directed edge means either a
    // non-manifold edge or two neighbours with opposite orientation.
    std::map<std::pair<int, int>, std::size_t> directed;
    std::vector<bool> used(static_cast<std::size_t>(n), false);
    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
        const auto& t = mesh.faces[f];
        for (int k = 0; k < 3; ++k) {
            if (t[k] < 0 || t[k] >= n) {
                throw TopologyError("face " + std::to_string(f) + " has out-of-range index " + std::to_string(t[k]));
            }
        }
        if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) {
            throw TopologyError("face " + std::to_string(f) + " repeats a vertex");
        }
        for (int k = 0; k < 3; ++k) {
            used[static_cast<std::size_t>(t[k])] = true;
            const std::pair<int, int> e{t[k], t[(k + 1) % 3]};
            auto [it, inserted] = directed.emplace(e, f);
            if (!inserted) {
                throw TopologyError("edge (" + std::to_string(e.first) + "," + std::to_string(e.second) +
                                    ") is non-manifold or inconsistently oriented (faces " +
                                    std::to_string(it->second) + " and " + std::to_string(f) + ")");
            }
        }
    }
    // Each undirected edge: at most one face per direction, so at most two
    // faces. A third face always repeats a direction, caught above.
    for (int v = 0; v < n; ++v) {
        if (!used[static_cast<std::size_t>(v)]) throw TopologyError("vertex " + std::to_string(v) + " is isolated");
    }

    const auto areas = triangle_areas(mesh.vertices, mesh.faces);
    double mean = 0.0;
    for (double a : areas) mean += a;
    mean /= static_cast<double>(areas.size());
    for (std::size_t f = 0; f < areas.size(); ++f) {
        if (!(areas[f] > kDegenerateAreaRatio * mean)) {
            throw TopologyError("face " + std::to_string(f) + " is degenerate (area " + std::to_string(areas[f]) + ")");
        }
    }
}

Eigen::Vector3d surface_centroid(const Positions& positions, std::span<const Face> faces) {
    Eigen::Vector3d sum = Eigen::Vector3d::Zero();
    double total = 0.0;
    for (const auto& t : faces) {
        const Eigen::Vector3d a = positions.row(t[0]).transpose();
        const Eigen::Vector3d b = positions.row(t[1]).transpose();
        const Eigen::Vector3d c = positions.row(t[2]).transpose();
        const double area = triangle_area(a, b, c);
        sum += area * (a + b + c) / 3.0;
        total += area;
    }
    if (total <= 0.0) return positions.colwise().mean().transpose();
    return sum / total;
}

double bounding_box_diagonal(const Positions& positions) {
    if (positions.rows() == 0) return 0.0;
    return (positions.colwise().maxCoeff() - positions.colwise().minCoeff()).norm();
}

}  // namespace curvflow
