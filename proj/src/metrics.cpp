#include "curvflow/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "curvflow/errors.hpp"
#include "curvflow/fem.hpp"

namespace curvflow {
namespace {

// Edge vectors of a triangle expressed in its own orthonormal frame:
// columns are (p1 - p0) and (p2 - p0). Returns false if the triangle has no
// well-defined plane.
bool flatten(const Eigen::Vector3d& p0, const Eigen::Vector3d& p1, const Eigen::Vector3d& p2,
             Eigen::Matrix2d& edges, Eigen::Vector3d* ex = nullptr, Eigen::Vector3d* ey = nullptr) {
    const Eigen::Vector3d e1 = p1 - p0;
    const Eigen::Vector3d e2 = p2 - p0;
    const double len = e1.norm();
    const Eigen::Vector3d n = e1.cross(e2);
    const double nn = n.norm();
    if (!(len > 0.0)) {
        edges.setZero();
        return false;
    }
    const Eigen::Vector3d x = e1 / len;
    if (!(nn > 0.0)) {
        // Collinear: keep the extent along e1, zero height.
        edges << len, e2.dot(x), 0.0, 0.0;
        return false;
    }
    const Eigen::Vector3d y = (n / nn).cross(x);
    edges << len, e2.dot(x), 0.0, e2.dot(y);
    if (ex) *ex = x;
    if (ey) *ey = y;
    return true;
}

}  // namespace

bool StretchSpectrum::any_collapsed() const {
    return std::any_of(collapsed.begin(), collapsed.end(), [](bool c) { return c; });
}

StretchSpectrum stretch_spectrum(const TriMesh& rest, const Positions& current) {
    if (current.rows() != rest.vertices.rows()) {
        throw DimensionMismatch("current positions have " + std::to_string(current.rows()) + " rows, rest mesh has " +
                                std::to_string(rest.vertices.rows()) + " vertices");
    }
    const std::size_t nf = rest.num_faces();
    StretchSpectrum s;
    s.lambda1.resize(nf);
    s.lambda2.resize(nf);
    s.direction.resize(nf);
    s.rest_area.resize(nf);
    s.trace.resize(nf);
    s.conformal.resize(nf);
    s.collapsed.assign(nf, false);

    for (std::size_t f = 0; f < nf; ++f) {
        const auto& t = rest.faces[f];
        Eigen::Matrix2d r;
        Eigen::Vector3d ex, ey;
        if (!flatten(rest.vertices.row(t[0]), rest.vertices.row(t[1]), rest.vertices.row(t[2]), r, &ex, &ey)) {
            throw DegenerateTriangle(f, 0.0);
        }
        s.rest_area[f] = 0.5 * r(0, 0) * r(1, 1);

        Eigen::Matrix2d c;
        const bool planar = flatten(current.row(t[0]), current.row(t[1]), current.row(t[2]), c);
        // r is upper triangular with positive diagonal.
        Eigen::Matrix2d rinv;
        rinv << 1.0 / r(0, 0), -r(0, 1) / (r(0, 0) * r(1, 1)), 0.0, 1.0 / r(1, 1);
        const Eigen::Matrix2d j = c * rinv;

        // Closed-form 2x2 SVD: sigma = q +- |r| with q, rr from the
        // conformal and anticonformal parts of j.
        const double e = 0.5 * (j(0, 0) + j(1, 1));
        const double fpart = 0.5 * (j(0, 0) - j(1, 1));
        const double g = 0.5 * (j(1, 0) + j(0, 1));
        const double h = 0.5 * (j(1, 0) - j(0, 1));
        const double q = std::hypot(e, h);
        const double rr = std::hypot(fpart, g);
        const double q2 = q * q;
        const double r2 = rr * rr;
        s.lambda1[f] = q + rr;
        s.lambda2[f] = planar ? std::abs(q - rr) : 0.0;
        s.collapsed[f] = !planar || !(s.lambda2[f] > 0.0);
        s.trace[f] = 2.0 * (q2 + r2);
        s.conformal[f] = 16.0 * q2 * r2;

        // Right singular vector for lambda1: the eigenvector of j'j with the
        // larger eigenvalue, mapped back into the rest triangle's plane.
        const Eigen::Matrix2d jtj = j.transpose() * j;
        const double off = jtj(0, 1);
        const double diff = 0.5 * (jtj(0, 0) - jtj(1, 1));
        Eigen::Vector2d v;
        if (off == 0.0) {
            v = diff >= 0.0 ? Eigen::Vector2d(1.0, 0.0) : Eigen::Vector2d(0.0, 1.0);
        } else {
            const double mu = diff + std::copysign(std::hypot(diff, off), diff == 0.0 ? 1.0 : diff);
            v = diff >= 0.0 ? Eigen::Vector2d(mu, off) : Eigen::Vector2d(off, -mu);
            v.normalize();
        }
        s.direction[f] = (v[0] * ex + v[1] * ey).normalized();
    }
    return s;
}

double qc_error(const StretchSpectrum& spectrum) {
    if (spectrum.any_collapsed()) return std::numeric_limits<double>::infinity();
    double num = 0.0;
    double den = 0.0;
    for (std::size_t f = 0; f < spectrum.size(); ++f) {
        num += spectrum.rest_area[f] * (spectrum.lambda1[f] / spectrum.lambda2[f]);
        den += spectrum.rest_area[f];
    }
    return den > 0.0 ? num / den : 1.0;
}

double sphericity_variance(const Positions& positions, const Eigen::VectorXd& weights) {
    if (weights.size() != positions.rows()) {
        throw DimensionMismatch("weights do not match the vertex count");
    }
    const double total = weights.sum();
    if (!(total > 0.0)) return 0.0;
    const Eigen::RowVector3d center = (weights.transpose() * positions) / total;
    const Eigen::VectorXd dist = (positions.rowwise() - center).rowwise().norm();
    const double mean = weights.dot(dist) / total;
    return weights.dot((dist.array() - mean).square().matrix()) / total;
}

double sphericity_variance(const Positions& positions, std::span<const Face> faces) {
    // Row sums of the hat-basis mass matrix are one third of the incident area.
    Eigen::VectorXd w = Eigen::VectorXd::Zero(positions.rows());
    const auto areas = triangle_areas(positions, faces);
    for (std::size_t f = 0; f < faces.size(); ++f) {
        for (int v : faces[f]) w[v] += areas[f] / 3.0;
    }
    return sphericity_variance(positions, w);
}

double convergence_delta(const Positions& prev, const Positions& next, const SparseSymMatrix& mass) {
    if (prev.rows() != next.rows() || prev.rows() != mass.size()) {
        throw DimensionMismatch("convergence_delta: positions have " + std::to_string(prev.rows()) + " and " +
                                std::to_string(next.rows()) + " rows, mass matrix is " + std::to_string(mass.size()));
    }
    const Positions d = next - prev;
    const Positions md = mass.storage() * d;
    return std::sqrt(std::max(0.0, (d.array() * md.array()).sum()));
}

EnergyDensity energy_density(double lambda1, double lambda2) {
    const double a = lambda1 * lambda1;
    const double b = lambda2 * lambda2;
    const double t = a + b;
    if (!(t > 0.0)) throw DegenerateTriangle(0, 0.0);
    const double d = a * b;
    const double diff = a - b;
    return {2.0 * d / t, diff * diff / (2.0 * t), 0.5 * t};
}

EnergyBreakdown energy_decomposition(const StretchSpectrum& spectrum) {
    EnergyBreakdown e;
    for (std::size_t f = 0; f < spectrum.size(); ++f) {
        const double a0 = spectrum.rest_area[f];
        const double t = spectrum.trace[f];
        if (!(t > 0.0)) throw DegenerateTriangle(f, 0.0);
        const double det = spectrum.lambda1[f] * spectrum.lambda2[f];
        const double d = det * det;
        e.area_tilde += a0 * 2.0 * d / t;
        e.conformal_tilde += a0 * spectrum.conformal[f] / (2.0 * t);
        e.dirichlet += a0 * 0.5 * t;
        e.area += a0 * det;
        e.conformal += det > 0.0 ? 0.5 * a0 * spectrum.conformal[f] / det
                                 : std::numeric_limits<double>::infinity();
    }
    e.total_tilde = e.area_tilde + e.conformal_tilde;
    return e;
}

EnergyBreakdown energy_decomposition(const TriMesh& rest, const Positions& current) {
    return energy_decomposition(stretch_spectrum(rest, current));
}

double min_triangle_area_ratio(const std::vector<double>& rest_areas, const std::vector<double>& current_areas) {
    if (rest_areas.size() != current_areas.size()) throw DimensionMismatch("area lists differ in length");
    double rest_total = 0.0;
    double current_total = 0.0;
    double lowest = std::numeric_limits<double>::infinity();
    for (std::size_t f = 0; f < rest_areas.size(); ++f) {
        rest_total += rest_areas[f];
        current_total += current_areas[f];
        lowest = std::min(lowest, current_areas[f] / rest_areas[f]);
    }
    if (!(current_total > 0.0)) return 0.0;
    return lowest / (current_total / rest_total);
}

}  // namespace curvflow
