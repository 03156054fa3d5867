#include <doctest.h>

#include <cmath>
#include <sstream>

#include "curvflow/errors.hpp"
#include "curvflow/oracle.hpp"

using namespace curvflow;

namespace {

const AnalyticShape kShapes[] = {AnalyticShape::catenoid, AnalyticShape::sphere, AnalyticShape::cylinder};
const FlowVariant kFlows[] = {FlowVariant::mcf, FlowVariant::heat, FlowVariant::cmcf};

// Right-hand side of the radius ODE for each case, written out separately.
double ode_rhs(const AnalyticCase& c, double r) {
    switch (c.shape) {
        case AnalyticShape::catenoid: return 0.0;
        case AnalyticShape::sphere: return c.flow == FlowVariant::heat ? -2.0 * r : -2.0 / r;
        case AnalyticShape::cylinder:
            return c.flow == FlowVariant::mcf ? -1.0 / r : c.flow == FlowVariant::heat ? -r : -1.0;
    }
    return 0.0;
}

}  // namespace

TEST_SUITE("oracle") {
    TEST_CASE("radius examples") {
        CHECK(radius({AnalyticShape::sphere, FlowVariant::mcf}, 0.1) == doctest::Approx(std::sqrt(0.6)).epsilon(1e-15));
        CHECK(radius({AnalyticShape::sphere, FlowVariant::mcf}, 0.1) == doctest::Approx(0.774597).epsilon(1e-6));
        CHECK(radius({AnalyticShape::cylinder, FlowVariant::cmcf}, 0.5) == 0.5);
        CHECK(radius({AnalyticShape::catenoid, FlowVariant::heat}, 7.0) == 1.0);
        CHECK(radius({AnalyticShape::sphere, FlowVariant::heat}, 0.5) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
        CHECK(radius({AnalyticShape::sphere, FlowVariant::heat}, 0.5) == doctest::Approx(0.367879).epsilon(1e-6));
        CHECK(radius({AnalyticShape::cylinder, FlowVariant::mcf}, 0.2) == doctest::Approx(std::sqrt(0.6)));
        CHECK(radius({AnalyticShape::cylinder, FlowVariant::heat}, 0.2) == doctest::Approx(std::exp(-0.2)));
    }

    TEST_CASE("every case starts at one and stays positive before its horizon") {
        for (auto s : kShapes) {
            for (auto f : kFlows) {
                const AnalyticCase c{s, f};
                CHECK(radius(c, 0.0) == 1.0);
                const double end = std::isinf(horizon(c)) ? 50.0 : horizon(c);
                for (int k = 0; k < 1000; ++k) CHECK(radius(c, end * k / 1000.0) > 0.0);
            }
        }
    }

    TEST_CASE("horizons") {
        CHECK(horizon({AnalyticShape::sphere, FlowVariant::mcf}) == 0.25);
        CHECK(horizon({AnalyticShape::sphere, FlowVariant::cmcf}) == 0.25);
        CHECK(horizon({AnalyticShape::cylinder, FlowVariant::mcf}) == 0.5);
        CHECK(horizon({AnalyticShape::cylinder, FlowVariant::cmcf}) == 1.0);
        CHECK(std::isinf(horizon({AnalyticShape::sphere, FlowVariant::heat})));
        CHECK(std::isinf(horizon({AnalyticShape::catenoid, FlowVariant::mcf})));
        CHECK_THROWS_AS((void)radius({AnalyticShape::sphere, FlowVariant::mcf}, 0.25), OutOfHorizon);
        CHECK_THROWS_AS((void)radius({AnalyticShape::cylinder, FlowVariant::cmcf}, 1.5), OutOfHorizon);
        CHECK_THROWS_AS((void)radius({AnalyticShape::cylinder, FlowVariant::heat}, -0.1), OutOfHorizon);
    }

    TEST_CASE("closed forms satisfy their ODEs") {
        const double h = 1e-6;
        for (auto s : kShapes) {
            for (auto f : kFlows) {
                const AnalyticCase c{s, f};
                // Half the horizon keeps the third derivative small enough for 1e-9.
                const double end = std::isinf(horizon(c)) ? 2.0 : 0.5 * horizon(c);
                for (int k = 1; k <= 20; ++k) {
                    const double t = end * k / 20.0;
                    const double fd = (radius(c, t + h) - radius(c, t - h)) / (2 * h);
                    CHECK(std::abs(fd - ode_rhs(c, radius(c, t))) <= 1e-9 * std::max(1.0, std::abs(fd)));
                    CHECK(std::abs(radius_derivative(c, t) - ode_rhs(c, radius(c, t))) <= 1e-14);
                }
            }
        }
    }

    TEST_CASE("initial speeds agree across flows") {
        const double expected[] = {0.0, -2.0, -1.0};
        for (int s = 0; s < 3; ++s) {
            for (auto f : kFlows) CHECK(radius_derivative({kShapes[s], f}, 0.0) == expected[s]);
        }
    }

    TEST_CASE("names round trip") {
        for (auto s : kShapes) CHECK(parse_analytic_shape(to_string(s)) == s);
        CHECK_THROWS_AS((void)parse_analytic_shape("torus"), SpecError);
    }

    TEST_CASE("standard cases cover the nine cells") {
        const auto cases = standard_cases();
        CHECK(cases.size() == 9);
        CHECK(select_cases(cases, {AnalyticShape::sphere}, {}).size() == 3);
        CHECK(select_cases(cases, {AnalyticShape::cylinder}, {FlowVariant::cmcf}).size() == 1);
        CHECK(select_cases(cases, {}, {FlowVariant::heat, FlowVariant::mcf}).size() == 6);
        for (const auto& c : cases) {
            if (c.analytic_case.shape == AnalyticShape::sphere) {
                CHECK(c.refined.has_value());
                CHECK(c.tolerance == 0.02);
            }
        }
    }

    TEST_CASE("small discrete comparisons and reporting") {
        OracleCase sphere;
        sphere.analytic_case = {AnalyticShape::sphere, FlowVariant::heat};
        sphere.spec = icosphere_spec(2);
        sphere.refined = icosphere_spec(3);
        sphere.dt = 1e-3;
        sphere.steps = 20;
        sphere.tolerance = 0.02;

        OracleCase catenoid;
        catenoid.analytic_case = {AnalyticShape::catenoid, FlowVariant::cmcf};
        catenoid.spec = catenoid_spec(24, 13);
        catenoid.dt = 1e-3;
        catenoid.steps = 10;
        catenoid.tolerance = 1e-3;

        const auto reports = run_cases({sphere, catenoid}, 2);
        REQUIRE(reports.size() == 2);
        const auto& rs = reports[0];
        CHECK(rs.analytic_case.shape == AnalyticShape::sphere);
        CHECK(rs.rows.size() == 21);
        CHECK(rs.rows.front().relative_error == 0.0);
        CHECK(rs.rows.back().flow_time == doctest::Approx(0.02));
        CHECK(rs.measured < 0.02);
        CHECK(rs.initial_speed == doctest::Approx(-2.0).epsilon(0.05));
        CHECK(rs.refined_error.has_value());
        CHECK(rs.order.has_value());
        CHECK(rs.tracking_ok());

        const auto& rc = reports[1];
        CHECK(rc.metric == "max_displacement/bbox_diagonal");
        CHECK(rc.measured <= 1e-3);
        CHECK(rc.pass());

        std::ostringstream csv;
        write_csv(csv, reports);
        std::size_t lines = 0;
        for (char ch : csv.str()) lines += ch == '\n';
        CHECK(lines == 1 + 21 + 11);
        CHECK(csv.str().rfind("shape,flow,step,", 0) == 0);

        std::ostringstream summary;
        write_summary(summary, reports);
        CHECK(summary.str().find("sphere") != std::string::npos);
        CHECK(summary.str().find("catenoid") != std::string::npos);
    }

    TEST_CASE("report verdict logic") {
        ComparisonReport r;
        r.status = "finished";
        r.steps = 2;
        r.rows.resize(3);
        r.rows.back().step = 2;
        r.measured = 0.01;
        r.tolerance = 0.02;
        CHECK(r.tracking_ok());
        r.refined_spec = "fine";
        r.min_refinement_reduction = 0.3;
        r.refined_error = 0.008;
        CHECK_FALSE(r.refinement_ok());
        r.refined_error = 0.006;
        CHECK(r.refinement_ok());
        r.expected_speed = -1.0;
        r.speed_tolerance = 0.05;
        r.initial_speed = -1.06;
        CHECK_FALSE(r.speed_ok());
        r.initial_speed = -0.97;
        CHECK(r.pass());
        r.status = "singular";
        CHECK_FALSE(r.pass());
    }
}
