#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "curvflow/mesh.hpp"
#include "curvflow/sparse_matrix.hpp"

namespace curvflow {

// Per-triangle singular values of the linear map taking the rest triangle to
// the current one, both flattened isometrically into their own planes.
// lambda1 >= lambda2 >= 0; their squares are the eigenvalues of g0^-1 g_t.
struct StretchSpectrum {
    std::vector<double> lambda1;
    std::vector<double> lambda2;
    std::vector<Eigen::Vector3d> direction;  // principal stretch direction v1, unit, in the rest triangle's plane
    std::vector<double> rest_area;
    std::vector<double> trace;        // lambda1^2 + lambda2^2
    std::vector<double> conformal;    // (lambda1^2 - lambda2^2)^2, computed without cancellation
    std::vector<bool> collapsed;      // current triangle has zero area

    [[nodiscard]] std::size_t size() const noexcept { return lambda1.size(); }
    [[nodiscard]] bool any_collapsed() const;
};

// Throws DimensionMismatch when `current` does not match the rest vertex
// count, DegenerateTriangle for a zero-area rest triangle. Collapsed current
// triangles are reported (lambda2 = 0), not thrown.
[[nodiscard]] StretchSpectrum stretch_spectrum(const TriMesh& rest, const Positions& current);

// Rest-area weighted mean of lambda1 / lambda2. +infinity if any triangle
// collapsed.
[[nodiscard]] double qc_error(const StretchSpectrum& spectrum);

// Weighted variance of the vertex distances to the weighted barycenter.
[[nodiscard]] double sphericity_variance(const Positions& positions, const Eigen::VectorXd& weights);
// Weights are the row sums of the mass matrix at `positions`.
[[nodiscard]] double sphericity_variance(const Positions& positions, std::span<const Face> faces);

// Mass-weighted L2 norm of next - prev: sqrt(sum_c d_c' D d_c).
[[nodiscard]] double convergence_delta(const Positions& prev, const Positions& next, const SparseSymMatrix& mass);

struct EnergyBreakdown {
    double area_tilde = 0.0;       // sum A0 * 2d / T
    double conformal_tilde = 0.0;  // sum A0 * (T^2 - 4d) / (2T)
    double total_tilde = 0.0;      // area_tilde + conformal_tilde
    double dirichlet = 0.0;        // sum A0 * T / 2
    // Unmodified energies with the sqrt(d) denominators. Diagnostics only;
    // conformal is +infinity once a triangle collapses.
    double area = 0.0;       // sum A0 * sqrt(d), the current surface area
    double conformal = 0.0;  // 1/2 sum A0 * (T^2 - 4d) / sqrt(d)
};

// Per unit rest area for one triangle with singular values (l1, l2):
// d = l1^2 l2^2, T = l1^2 + l2^2.
struct EnergyDensity {
    double area_tilde = 0.0;
    double conformal_tilde = 0.0;
    double half_trace = 0.0;
};
[[nodiscard]] EnergyDensity energy_density(double lambda1, double lambda2);

[[nodiscard]] EnergyBreakdown energy_decomposition(const StretchSpectrum& spectrum);
[[nodiscard]] EnergyBreakdown energy_decomposition(const TriMesh& rest, const Positions& current);

// Smallest per-triangle area ratio current / rest, divided by the total area
// ratio so uniform scaling leaves it at 1.
[[nodiscard]] double min_triangle_area_ratio(const std::vector<double>& rest_areas,
                                             const std::vector<double>& current_areas);

// One row of per-step measurements. Energies are taken on the positions the
// solver produced, before any renormalization; `dirichlet_energy_normalized`
// is the same energy after rescaling to unit area.
struct MetricRecord {
    std::size_t step = 0;
    double flow_time = 0.0;
    double area = 0.0;
    double convergence_delta = 0.0;
    double qc_error = 1.0;
    double sphericity_variance = 0.0;  // at unit area
    double dirichlet_energy = 0.0;
    double dirichlet_energy_normalized = 0.0;
    double area_energy_tilde = 0.0;
    double conformal_energy_tilde = 0.0;
    double area_energy = 0.0;
    double conformal_energy = 0.0;
    double min_tri_area_ratio = 1.0;
    double max_displacement = 0.0;
    std::string status;
};

}  // namespace curvflow
