#include "curvflow/oracle.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <ostream>
#include <thread>

#include "curvflow/errors.hpp"

namespace curvflow {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(const char* pattern, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, pattern, v);
    return buf;
}

struct Tracking {
    std::vector<ComparisonRow> rows;
    double max_error = 0.0;
    double max_displacement = 0.0;
    double initial_speed = 0.0;
    std::size_t vertices = 0;
    double diagonal = 0.0;
    FlowState state;
};

Tracking track(const OracleCase& c, const ShapeSpec& spec) {
    const TriMesh mesh = generate(spec);
    FlowConfig config;
    config.variant = c.analytic_case.flow;
    config.dt = c.dt;
    config.steps = c.steps;
    config.normalize_area = false;
    config.recenter = false;
    config.solver = c.solver;
    if (c.analytic_case.shape == AnalyticShape::catenoid) config.boundary_mode = BoundaryMode::fixed;

    Tracking t;
    t.vertices = mesh.num_vertices();
    t.diagonal = bounding_box_diagonal(mesh.vertices);
    double r0 = 0.0;
    auto observe = [&](const FlowState& s, const MetricRecord&) {
        const double r = mid_ring_radius(s.positions, mesh, spec);
        if (s.step == 0) r0 = r;
        ComparisonRow row;
        row.step = s.step;
        row.flow_time = s.flow_time;
        row.measured = r / r0;
        row.analytic = radius(c.analytic_case, s.flow_time);
        row.relative_error = std::abs(row.measured - row.analytic) / row.analytic;
        row.displacement = (s.positions - mesh.vertices).rowwise().norm().maxCoeff();
        if (s.step == 1) t.initial_speed = (row.measured - 1.0) / c.dt;
        t.max_error = std::max(t.max_error, row.relative_error);
        t.max_displacement = std::max(t.max_displacement, row.displacement);
        t.rows.push_back(row);
    };
    t.state = run(mesh, config, observe).state;
    return t;
}

}  // namespace

const char* to_string(AnalyticShape shape) noexcept {
    switch (shape) {
        case AnalyticShape::catenoid: return "catenoid";
        case AnalyticShape::sphere: return "sphere";
        case AnalyticShape::cylinder: return "cylinder";
    }
    return "?";
}

AnalyticShape parse_analytic_shape(const std::string& name) {
    if (name == "catenoid") return AnalyticShape::catenoid;
    if (name == "sphere") return AnalyticShape::sphere;
    if (name == "cylinder") return AnalyticShape::cylinder;
    throw SpecError("unknown analytic shape '" + name + "' (expected catenoid, sphere or cylinder)");
}

double horizon(const AnalyticCase& c) noexcept {
    if (c.shape == AnalyticShape::catenoid || c.flow == FlowVariant::heat) return kInf;
    if (c.shape == AnalyticShape::sphere) return 0.25;
    return c.flow == FlowVariant::mcf ? 0.5 : 1.0;
}

double radius(const AnalyticCase& c, double t) {
    if (!(t >= 0.0) || !(t < horizon(c))) {
        throw OutOfHorizon("t = " + fmt("%g", t) + " is outside [0, " + fmt("%g", horizon(c)) + ") for " +
                           to_string(c.shape) + "/" + to_string(c.flow));
    }
    switch (c.shape) {
        case AnalyticShape::catenoid: return 1.0;
        case AnalyticShape::sphere:
            return c.flow == FlowVariant::heat ? std::exp(-2.0 * t) : std::sqrt(1.0 - 4.0 * t);
        case AnalyticShape::cylinder:
            switch (c.flow) {
                case FlowVariant::mcf: return std::sqrt(1.0 - 2.0 * t);
                case FlowVariant::heat: return std::exp(-t);
                case FlowVariant::cmcf: return 1.0 - t;
            }
    }
    return 1.0;
}

double radius_derivative(const AnalyticCase& c, double t) {
    const double r = radius(c, t);
    switch (c.shape) {
        case AnalyticShape::catenoid: return 0.0;
        case AnalyticShape::sphere: return c.flow == FlowVariant::heat ? -2.0 * r : -2.0 / r;
        case AnalyticShape::cylinder:
            switch (c.flow) {
                case FlowVariant::mcf: return -1.0 / r;
                case FlowVariant::heat: return -r;
                case FlowVariant::cmcf: return -1.0;
            }
    }
    return 0.0;
}

bool ComparisonReport::tracking_ok() const {
    return status != to_string(FlowStatus::singular) && !rows.empty() && rows.back().step == steps &&
           measured <= tolerance;
}

bool ComparisonReport::speed_ok() const {
    if (!speed_tolerance) return true;
    return std::abs(initial_speed - expected_speed) <= *speed_tolerance * std::abs(expected_speed);
}

bool ComparisonReport::refinement_ok() const {
    if (!refined_spec) return true;
    return refined_error && *refined_error <= (1.0 - min_refinement_reduction) * measured;
}

ComparisonReport compare_discrete(const OracleCase& c) {
    const auto start = std::chrono::steady_clock::now();
    ComparisonReport report;
    report.analytic_case = c.analytic_case;
    report.mesh_spec = to_string(c.spec);
    report.dt = c.dt;
    report.steps = c.steps;
    report.tolerance = c.tolerance;
    report.speed_tolerance = c.speed_tolerance;
    report.expected_speed = radius_derivative(c.analytic_case, 0.0);
    report.min_refinement_reduction = c.min_refinement_reduction;

    const bool catenoid = c.analytic_case.shape == AnalyticShape::catenoid;
    report.metric = catenoid ? "max_displacement/bbox_diagonal" : "max_relative_radius_error";

    Tracking base = track(c, c.spec);
    report.rows = std::move(base.rows);
    report.vertices = base.vertices;
    report.initial_speed = base.initial_speed;
    report.status = to_string(base.state.status);
    report.singular = base.state.singular;
    report.measured = catenoid ? base.max_displacement / base.diagonal : base.max_error;

    if (c.refined) {
        report.refined_spec = to_string(*c.refined);
        Tracking fine = track(c, *c.refined);
        if (fine.state.status != FlowStatus::singular) {
            report.refined_error = catenoid ? fine.max_displacement / fine.diagonal : fine.max_error;
            if (*report.refined_error > 0.0 && report.measured > 0.0) {
                report.order = std::log2(report.measured / *report.refined_error);
            }
        }
    }
    report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

std::vector<OracleCase> standard_cases() {
    std::vector<OracleCase> out;
    for (auto flow : {FlowVariant::mcf, FlowVariant::heat, FlowVariant::cmcf}) {
        OracleCase sphere;
        sphere.analytic_case = {AnalyticShape::sphere, flow};
        sphere.spec = icosphere_spec(3);
        sphere.refined = icosphere_spec(4);
        sphere.dt = 1e-3;
        sphere.steps = 100;
        sphere.tolerance = 0.02;
        sphere.min_refinement_reduction = 0.3;
        out.push_back(sphere);
    }
    for (auto flow : {FlowVariant::mcf, FlowVariant::heat, FlowVariant::cmcf}) {
        OracleCase cylinder;
        cylinder.analytic_case = {AnalyticShape::cylinder, flow};
        cylinder.spec = cylinder_spec(1.0, 6.0, 64, 80, true);
        cylinder.dt = 1e-3;
        cylinder.steps = 200;
        cylinder.tolerance = 0.05;
        cylinder.speed_tolerance = 0.05;
        out.push_back(cylinder);
    }
    for (auto flow : {FlowVariant::mcf, FlowVariant::heat, FlowVariant::cmcf}) {
        OracleCase catenoid;
        catenoid.analytic_case = {AnalyticShape::catenoid, flow};
        catenoid.spec = catenoid_spec();
        catenoid.dt = 1e-3;
        catenoid.steps = 100;
        catenoid.tolerance = 1e-3;
        out.push_back(catenoid);
    }
    return out;
}

std::vector<OracleCase> select_cases(const std::vector<OracleCase>& cases, const std::vector<AnalyticShape>& shapes,
                                     const std::vector<FlowVariant>& flows) {
    std::vector<OracleCase> out;
    for (const auto& c : cases) {
        const bool shape_ok =
            shapes.empty() || std::find(shapes.begin(), shapes.end(), c.analytic_case.shape) != shapes.end();
        const bool flow_ok = flows.empty() || std::find(flows.begin(), flows.end(), c.analytic_case.flow) != flows.end();
        if (shape_ok && flow_ok) out.push_back(c);
    }
    return out;
}

std::vector<ComparisonReport> run_cases(const std::vector<OracleCase>& cases, unsigned jobs) {
    std::vector<ComparisonReport> reports(cases.size());
    std::vector<std::exception_ptr> errors(cases.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < cases.size(); i = next++) {
            try {
                reports[i] = compare_discrete(cases[i]);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const unsigned n = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(cases.size())));
    std::vector<std::thread> pool;
    for (unsigned k = 1; k < n; ++k) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return reports;
}

void write_csv(std::ostream& out, const std::vector<ComparisonReport>& reports) {
    out << "shape,flow,step,flow_time,measured_radius,analytic_radius,relative_error,max_displacement\n";
    char buf[256];
    for (const auto& r : reports) {
        for (const auto& row : r.rows) {
            std::snprintf(buf, sizeof buf, "%s,%s,%zu,%.17g,%.17g,%.17g,%.17g,%.17g\n", to_string(r.analytic_case.shape),
                          to_string(r.analytic_case.flow), row.step, row.flow_time, row.measured, row.analytic,
                          row.relative_error, row.displacement);
            out << buf;
        }
    }
}

void write_summary(std::ostream& out, const std::vector<ComparisonReport>& reports) {
    char buf[512];
    std::snprintf(buf, sizeof buf, "%-9s %-5s %6s %-30s %11s %9s %9s %9s %9s %7s %s\n", "shape", "flow", "verts", "metric",
                  "measured", "tol", "speed", "refined", "order", "time", "result");
    out << buf;
    for (const auto& r : reports) {
        const std::string refined = r.refined_error ? fmt("%.3e", *r.refined_error) : "-";
        const std::string order = r.order ? fmt("%.2f", *r.order) : "-";
        std::string result = r.pass() ? "PASS" : "FAIL";
        if (!r.tracking_ok()) result += " tracking";
        if (!r.speed_ok()) result += " speed";
        if (!r.refinement_ok()) result += " refinement";
        if (r.singular) result += " (singular at step " + std::to_string(r.singular->step) + ")";
        std::snprintf(buf, sizeof buf, "%-9s %-5s %6zu %-30s %11.4e %9.2e %9.4f %9s %9s %6.2fs %s\n",
                      to_string(r.analytic_case.shape), to_string(r.analytic_case.flow), r.vertices, r.metric.c_str(),
                      r.measured, r.tolerance, r.initial_speed, refined.c_str(), order.c_str(), r.seconds,
                      result.c_str());
        out << buf;
    }
}

}  // namespace curvflow
