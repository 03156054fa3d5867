#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "curvflow/flow.hpp"
#include "curvflow/shapes.hpp"

namespace curvflow {

enum class AnalyticShape { catenoid, sphere, cylinder };

[[nodiscard]] const char* to_string(AnalyticShape shape) noexcept;
// Throws SpecError.
[[nodiscard]] AnalyticShape parse_analytic_shape(const std::string& name);

// Closed-form radius evolution of a unit-radius sphere, infinite cylinder or
// catenoid neck under one of the three flows.
struct AnalyticCase {
    AnalyticShape shape = AnalyticShape::sphere;
    FlowVariant flow = FlowVariant::mcf;
};

// First time at which the radius reaches zero; +infinity if never.
[[nodiscard]] double horizon(const AnalyticCase& c) noexcept;
// Throws OutOfHorizon for t outside [0, horizon).
[[nodiscard]] double radius(const AnalyticCase& c, double t);
[[nodiscard]] double radius_derivative(const AnalyticCase& c, double t);

struct ComparisonRow {
    std::size_t step = 0;
    double flow_time = 0.0;
    double measured = 0.0;   // measured radius divided by the measured initial radius
    double analytic = 0.0;
    double relative_error = 0.0;
    double displacement = 0.0;  // max vertex distance from the initial mesh
};

struct ComparisonReport {
    AnalyticCase analytic_case;
    std::string mesh_spec;
    std::size_t vertices = 0;
    double dt = 0.0;
    std::size_t steps = 0;
    std::vector<ComparisonRow> rows;

    // Pass metric: max relative radius error, or for the catenoid the max
    // vertex displacement divided by the bounding-box diagonal.
    std::string metric;
    double measured = 0.0;
    double tolerance = 0.0;

    double initial_speed = 0.0;   // (r1 - r0) / (dt r0)
    double expected_speed = 0.0;  // dr/dt at t = 0
    std::optional<double> speed_tolerance;

    // Same case on a finer mesh, when requested.
    std::optional<std::string> refined_spec;
    std::optional<double> refined_error;
    std::optional<double> order;           // log2(coarse error / fine error)
    double min_refinement_reduction = 0.0;  // required 1 - fine / coarse

    std::string status;  // final flow status of the base run
    std::optional<SingularEvent> singular;
    double seconds = 0.0;

    [[nodiscard]] bool tracking_ok() const;
    [[nodiscard]] bool speed_ok() const;
    [[nodiscard]] bool refinement_ok() const;
    [[nodiscard]] bool pass() const { return tracking_ok() && speed_ok() && refinement_ok(); }
};

struct OracleCase {
    AnalyticCase analytic_case;
    ShapeSpec spec;
    std::optional<ShapeSpec> refined;
    double dt = 1e-3;
    std::size_t steps = 100;
    double tolerance = 0.02;
    std::optional<double> speed_tolerance;
    double min_refinement_reduction = 0.3;
    SolverKind solver = SolverKind::direct;
};

// Runs the flow without renormalization and compares against the closed
// form. Radius is measured on the mid ring (rotational shapes) or as the mean
// vertex distance from the centroid (sphere). The catenoid keeps its boundary
// rings fixed. Flow failures end up in the report.
[[nodiscard]] ComparisonReport compare_discrete(const OracleCase& c);

// Frozen tolerances for the nine shape and flow cells.
[[nodiscard]] std::vector<OracleCase> standard_cases();
[[nodiscard]] std::vector<OracleCase> select_cases(const std::vector<OracleCase>& cases,
                                                   const std::vector<AnalyticShape>& shapes,
                                                   const std::vector<FlowVariant>& flows);

// Runs the cases on `jobs` worker threads; the reports keep the input order.
[[nodiscard]] std::vector<ComparisonReport> run_cases(const std::vector<OracleCase>& cases, unsigned jobs);

// One row per step and case.
void write_csv(std::ostream& out, const std::vector<ComparisonReport>& reports);
// One line per case.
void write_summary(std::ostream& out, const std::vector<ComparisonReport>& reports);

}  // namespace curvflow
