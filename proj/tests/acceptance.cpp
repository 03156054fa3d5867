// Runs the ten acceptance criteria and prints one PASS/FAIL line per criterion.
// Exit status is nonzero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "curvflow/cholesky.hpp"
#include "curvflow/errors.hpp"
#include "curvflow/fem.hpp"
#include "curvflow/flow.hpp"
#include "curvflow/metrics.hpp"
#include "curvflow/oracle.hpp"
#include "curvflow/shapes.hpp"
#include "support.hpp"

using namespace curvflow;
using namespace testsupport;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Verdict {
    bool pass = true;
    std::vector<std::string> details;

    void check(bool ok, const std::string& what) {
        pass = pass && ok;
        details.push_back(std::string(ok ? "met    " : "unmet  ") + what);
    }
};

template <class... Args>
std::string fmt(const char* pattern, Args... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, pattern, args...);
    return buf;
}

// Dumbbell runs shared by the singularity, limit, reuse and monotonicity criteria.
struct DumbbellRun {
    FlowResult result;
    double seconds = 0.0;
    std::vector<double> normalized_energy;  // rest Dirichlet energy of the unit-area positions, per step
    bool stiffness_reused = true;           // L pointer and values equal L0 at every step
};

const TriMesh& dumbbell() {
    static const TriMesh mesh = generate(dumbbell_spec());
    return mesh;
}

const DumbbellRun& dumbbell_run(FlowVariant variant) {
    static std::vector<std::pair<FlowVariant, DumbbellRun>> cache;
    for (const auto& [v, run] : cache) {
        if (v == variant) return run;
    }
    FlowConfig c;
    c.variant = variant;
    c.dt = 1e-3;
    c.steps = 512;
    c.normalize_area = true;
    c.recenter = true;
    DumbbellRun r;
    const SparseSymMatrix l0 = assemble_stiffness(dumbbell());
    const auto start = Clock::now();
    r.result = run(dumbbell(), c, [&](const FlowState& s, const MetricRecord&) {
        r.normalized_energy.push_back(dirichlet_energy(l0, s.positions) / surface_area(s.positions, dumbbell().faces));
        if (variant == FlowVariant::cmcf) {
            r.stiffness_reused = r.stiffness_reused && s.stiffness.get() == s.rest_stiffness.get() &&
                                 s.stiffness->identical(l0);
        }
    });
    r.seconds = seconds_since(start);
    cache.emplace_back(variant, std::move(r));
    return cache.back().second;
}

std::string describe(const ComparisonReport& r) {
    std::string s = fmt("%s/%s %s: %s %.3e (tol %.3g), speed %.4f", to_string(r.analytic_case.shape),
                        to_string(r.analytic_case.flow), r.mesh_spec.c_str(), r.metric.c_str(), r.measured,
                        r.tolerance, r.initial_speed);
    if (r.refined_error) s += fmt(", refined %.3e (reduction %.1f%%)", *r.refined_error, 100.0 * (1.0 - *r.refined_error / r.measured));
    s += fmt(", %.2f s, %s", r.seconds, r.status.c_str());
    return s;
}

Verdict sphere_tracking() {
    Verdict v;
    for (const auto& c : select_cases(standard_cases(), {AnalyticShape::sphere}, {})) {
        const ComparisonReport r = compare_discrete(c);
        v.details.push_back("       " + describe(r));
        v.check(r.tracking_ok(), fmt("%s radius within 2%% at every step", to_string(c.analytic_case.flow)));
        v.check(r.refinement_ok(), fmt("%s error drops by at least 30%% one level finer", to_string(c.analytic_case.flow)));
        v.check(r.seconds < 10.0, fmt("%s runtime %.2f s < 10 s", to_string(c.analytic_case.flow), r.seconds));
    }
    return v;
}

Verdict cylinder_tracking() {
    Verdict v;
    double total = 0.0;
    for (const auto& c : select_cases(standard_cases(), {AnalyticShape::cylinder}, {})) {
        const ComparisonReport r = compare_discrete(c);
        total += r.seconds;
        v.details.push_back("       " + describe(r));
        v.check(r.status == "finished" && r.tracking_ok(),
                fmt("%s mid-ring radius within 5%% up to t = %.2f", to_string(c.analytic_case.flow), r.rows.back().flow_time));
        v.check(r.speed_ok(), fmt("%s initial speed %.4f within 5%% of -1", to_string(c.analytic_case.flow), r.initial_speed));
    }
    v.check(total < 60.0, fmt("runtime %.2f s < 60 s", total));
    return v;
}

Verdict catenoid_stationarity() {
    Verdict v;
    for (const auto& c : select_cases(standard_cases(), {AnalyticShape::catenoid}, {})) {
        const ComparisonReport r = compare_discrete(c);
        v.details.push_back("       " + describe(r));
        v.check(r.pass() && r.steps == 100,
                fmt("%s max displacement / diagonal %.3e <= 1e-3", to_string(c.analytic_case.flow), r.measured));
    }
    return v;
}

Verdict singularity_dichotomy() {
    Verdict v;
    v.details.push_back(fmt("       dumbbell: %lld vertices", static_cast<long long>(dumbbell().vertices.rows())));
    const DumbbellRun& mcf = dumbbell_run(FlowVariant::mcf);
    const auto& ev = mcf.result.state.singular;
    const bool cause_ok = ev && (ev->cause == "not_positive_definite" || ev->cause == "degenerate_triangle");
    v.check(mcf.result.state.status == FlowStatus::singular && ev && ev->step <= 32 && cause_ok,
            ev ? fmt("mcf singular at step %zu (%s)", ev->step, ev->cause.c_str()) : std::string("mcf never singular"));
    for (auto variant : {FlowVariant::heat, FlowVariant::cmcf}) {
        const DumbbellRun& r = dumbbell_run(variant);
        v.check(r.result.state.status == FlowStatus::finished && r.result.state.step == 512 && !r.result.state.singular,
                fmt("%s completes %zu of 512 steps", to_string(variant), r.result.state.step));
    }
    for (auto variant : {FlowVariant::mcf, FlowVariant::heat, FlowVariant::cmcf}) {
        const double t = dumbbell_run(variant).seconds;
        v.check(t < 120.0, fmt("%s runtime %.2f s < 120 s", to_string(variant), t));
    }
    return v;
}

Verdict cmcf_limit() {
    Verdict v;
    const DumbbellRun& r = dumbbell_run(FlowVariant::cmcf);
    const auto& recs = r.result.records;
    if (r.result.state.status != FlowStatus::finished || recs.size() != 513) {
        v.check(false, "cmcf run did not finish 512 steps");
        return v;
    }
    const Positions& p = r.result.state.positions;
    const auto& faces = dumbbell().faces;
    const Eigen::Vector3d center = surface_centroid(p, faces);
    const double mean_radius = (p.rowwise() - center.transpose()).rowwise().norm().mean();
    const double sph = sphericity_variance(p, faces) / (mean_radius * mean_radius);
    v.check(sph < 1e-3, fmt("sphericity / mean radius^2 = %.3e < 1e-3", sph));
    v.check(recs.back().qc_error < 1.15, fmt("final qc error %.5f < 1.15", recs.back().qc_error));
    const std::size_t tail = 512 - 512 / 10;
    double worst_rise = 0.0;
    for (std::size_t k = tail + 1; k < recs.size(); ++k) {
        worst_rise = std::max(worst_rise, recs[k].qc_error - recs[k - 1].qc_error);
    }
    v.check(worst_rise <= 1e-3, fmt("largest qc rise over steps %zu..512 is %.2e <= 1e-3", tail, worst_rise));
    const double area = surface_area(p, faces);
    const double delta = recs.back().convergence_delta / std::sqrt(area);
    v.check(delta < 1e-4, fmt("convergence delta at step 512 = %.3e < 1e-4 (area %.6f)", delta, area));
    return v;
}

double max_relative_difference(const SparseSymMatrix& a, const SparseSymMatrix& b) {
    if (!a.same_pattern(b)) return INFINITY;
    const auto diff = (a.storage() - b.storage()).eval();
    double worst = 0.0;
    for (int k = 0; k < diff.nonZeros(); ++k) worst = std::max(worst, std::abs(diff.valuePtr()[k]));
    return worst / b.max_abs();
}

Verdict stiffness_reuse() {
    Verdict v;
    const DumbbellRun& r = dumbbell_run(FlowVariant::cmcf);
    v.check(r.stiffness_reused && r.result.records.size() == 513,
            fmt("cmcf stiffness is L0 (same object, identical values) at all %zu observed steps", r.result.records.size()));
    std::mt19937_64 rng(7);
    TriMesh bumpy = generate(icosphere_spec(3));
    bumpy.vertices = jitter(bumpy.vertices, 0.02, rng);
    const std::vector<std::pair<std::string, TriMesh>> meshes{
        {"icosphere", generate(icosphere_spec(3))}, {"dumbbell", dumbbell()}, {"jittered icosphere", bumpy}};
    for (const auto& [name, mesh] : meshes) {
        const SparseSymMatrix l0 = assemble_stiffness(mesh);
        double worst = 0.0;
        for (double alpha : {0.5, 2.0, 10.0}) {
            TriMesh scaled = mesh;
            scaled.vertices *= alpha;
            worst = std::max(worst, max_relative_difference(assemble_stiffness(scaled), l0));
        }
        v.check(worst <= 1e-12, fmt("%s scaled copies reproduce L0 to %.2e relative", name.c_str(), worst));
    }
    return v;
}

Verdict energy_identities() {
    Verdict v;
    std::mt19937_64 rng(11);
    double worst_sum = 0.0, worst_conformal = 0.0, worst_spectrum = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        TriMesh rest = generate(icosphere_spec(2));
        rest.vertices = jitter(rest.vertices, 0.03, rng);
        const Positions cur = jitter(rest.vertices, 0.2, rng);
        const EnergyBreakdown e = energy_decomposition(rest, cur);
        const double dirichlet = dirichlet_energy(assemble_stiffness(rest), cur);
        worst_sum = std::max(worst_sum, std::abs(e.area_tilde + e.conformal_tilde - dirichlet) / dirichlet);

        std::uniform_real_distribution<double> scale(0.1, 10.0);
        const Positions similar = transform(rest.vertices, scale(rng) * random_rotation(rng), Eigen::RowVector3d(1, 2, 3));
        const EnergyBreakdown s = energy_decomposition(rest, similar);
        worst_conformal = std::max(worst_conformal, std::abs(s.conformal_tilde) / s.dirichlet);
    }
    std::uniform_real_distribution<double> u(0.05, 20.0);
    for (int k = 0; k < 100000; ++k) {
        const double a = u(rng), b = u(rng);
        const double l1 = std::max(a, b), l2 = std::min(a, b);
        const double t = l1 * l1 + l2 * l2;
        const double d = l1 * l1 * l2 * l2;
        const double lhs = 2.0 * d / t + (t * t - 4.0 * d) / (2.0 * t);
        const EnergyDensity e = energy_density(l1, l2);
        const double err = std::max(std::abs(lhs - t / 2.0), std::abs(e.area_tilde + e.conformal_tilde - e.half_trace)) / (t / 2.0);
        worst_spectrum = std::max(worst_spectrum, err);
    }
    v.check(worst_sum <= 1e-10, fmt("area + conformal energy = Dirichlet energy to %.2e over 100 meshes", worst_sum));
    v.check(worst_conformal <= 1e-12, fmt("conformal energy of similarities %.2e <= 1e-12 relative", worst_conformal));
    v.check(worst_spectrum <= 1e-12, fmt("per-triangle identity to %.2e over 1e5 spectra", worst_spectrum));
    return v;
}

Verdict gradient_check() {
    Verdict v;
    std::mt19937_64 rng(13);
    TriMesh m = grid(9, 4, 2.0, 1.0);
    std::uniform_real_distribution<double> u(-0.02, 0.02);
    std::uniform_real_distribution<double> h(-0.2, 0.2);
    for (Eigen::Index i = 0; i < m.vertices.rows(); ++i) {
        m.vertices(i, 0) += u(rng);
        m.vertices(i, 1) += u(rng);
        m.vertices(i, 2) += h(rng);
    }
    const SparseSymMatrix l = assemble_stiffness(m);
    const Positions x = m.vertices;
    const Positions grad = dirichlet_gradient(l, x);
    const double step = 1e-5;
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const Positions dir = random_positions(x.rows(), rng);
        const double fd = (dirichlet_energy(l, x + step * dir) - dirichlet_energy(l, x - step * dir)) / (2 * step);
        const double exact = (grad.array() * dir.array()).sum();
        worst = std::max(worst, std::abs(fd - exact) / std::abs(exact));
    }
    v.check(m.vertices.rows() == 50, fmt("mesh has %lld vertices", static_cast<long long>(m.vertices.rows())));
    v.check(worst <= 1e-6, fmt("gradient vs central differences: worst relative error %.2e", worst));
    return v;
}

// Largest relative rise e[k] - e[k-1] over k > burn_in.
double worst_rise(const std::vector<double>& e, std::size_t burn_in) {
    double worst = 0.0;
    for (std::size_t k = burn_in + 1; k < e.size(); ++k) worst = std::max(worst, (e[k] - e[k - 1]) / e[k - 1]);
    return worst;
}

Verdict energy_monotonicity() {
    Verdict v;
    const std::vector<std::pair<std::string, TriMesh>> meshes{{"icosphere", generate(icosphere_spec(3))},
                                                              {"dumbbell", dumbbell()}};
    for (const auto& [name, mesh] : meshes) {
        FlowConfig c;
        c.variant = FlowVariant::cmcf;
        c.steps = 100;
        c.normalize_area = false;
        c.recenter = false;
        std::vector<double> energy;
        const FlowResult r = run(mesh, c, [&](const FlowState&, const MetricRecord& rec) {
            energy.push_back(rec.dirichlet_energy);
        });
        const double rise = worst_rise(energy, 0);
        v.check(r.state.status == FlowStatus::finished && rise <= 1e-10,
                fmt("%s unnormalized, %zu steps: largest relative rise %.2e <= 1e-10", name.c_str(), r.state.step, rise));
    }

    FlowConfig c;
    c.variant = FlowVariant::cmcf;
    c.steps = 512;
    const SparseSymMatrix l0 = assemble_stiffness(meshes[0].second);
    std::vector<double> sphere_energy;
    const FlowResult sphere = run(meshes[0].second, c, [&](const FlowState& s, const MetricRecord&) {
        sphere_energy.push_back(dirichlet_energy(l0, s.positions) / surface_area(s.positions, meshes[0].second.faces));
    });
    const double sphere_rise = worst_rise(sphere_energy, 5);
    v.check(sphere.state.status == FlowStatus::finished && sphere_rise <= 1e-8,
            fmt("icosphere normalized, 512 steps: largest relative rise after step 5 is %.2e <= 1e-8", sphere_rise));

    const DumbbellRun& d = dumbbell_run(FlowVariant::cmcf);
    const auto& e = d.normalized_energy;
    const double rise = worst_rise(e, 5);
    std::size_t peak = 0;
    for (std::size_t k = 0; k < e.size(); ++k) {
        if (e[k] > e[peak]) peak = k;
    }
    v.check(rise <= 1e-8, fmt("dumbbell normalized, 512 steps: largest relative rise after step 5 is %.2e <= 1e-8", rise));
    if (!e.empty()) {
        v.details.push_back(fmt("       dumbbell E/A: step 0 %.4f, peak %.4f at step %zu, final %.4f", e.front(), e[peak], peak, e.back()));
    }
    return v;
}

SparseSymMatrix dense_to_sparse(const Eigen::MatrixXd& a) { return SparseSymMatrix(a.sparseView(0.0, 0.0)); }

Verdict solver_failures() {
    Verdict v;
    std::mt19937_64 rng(17);

    std::vector<std::pair<std::string, SparseSymMatrix>> indefinite;
    Eigen::Matrix2d a2;
    a2 << 1, 2, 2, 1;
    indefinite.emplace_back("[[1,2],[2,1]]", dense_to_sparse(a2));
    Eigen::Matrix3d a3 = Eigen::Vector3d(4, -1, 4).asDiagonal();
    indefinite.emplace_back("diag(4,-1,4)", dense_to_sparse(a3));
    indefinite.emplace_back("rest stiffness", assemble_stiffness(generate(icosphere_spec(2))));
    const SparseSymMatrix base = random_spd(generate(icosphere_spec(1)), rng);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig{Eigen::MatrixXd(base.storage())};
    const double lo = eig.eigenvalues()(0);
    const double hi = eig.eigenvalues()(eig.eigenvalues().size() - 1);
    for (double frac : {0.01, 0.3, 0.9}) {
        SparseSymMatrix::Storage id(base.size(), base.size());
        id.setIdentity();
        indefinite.emplace_back(fmt("shifted SPD (%.2f of spectrum)", frac),
                                SparseSymMatrix(base.storage() - (lo + frac * (hi - lo)) * id));
    }
    for (const auto& [name, a] : indefinite) {
        bool direct_rejects = false;
        try {
            (void)factorize(a);
        } catch (const NotPositiveDefinite&) {
            direct_rejects = true;
        }
        int rejected = 0, solved = 0, wrong = 0;
        for (int trial = 0; trial < 5; ++trial) {
            const Eigen::VectorXd b = Eigen::VectorXd::Random(a.size());
            try {
                const Eigen::MatrixXd x = solve_cg(a, b, 1e-10, 5000);
                const double res = (a.storage() * x - b).norm() / b.norm();
                (res <= 1e-8 ? solved : wrong) += 1;
            } catch (const Breakdown&) {
                ++rejected;
            } catch (const MaxIterations&) {
                ++rejected;
            }
        }
        v.check(direct_rejects && wrong == 0,
                fmt("%s: direct %s, CG %d rejected / %d solved / %d wrong", name.c_str(),
                    direct_rejects ? "NotPositiveDefinite" : "accepted", rejected, solved, wrong));
    }

    std::vector<std::pair<std::string, SparseSymMatrix>> corpus;
    for (const auto& [name, m] : std::vector<std::pair<std::string, TriMesh>>{
             {"icosphere", generate(icosphere_spec(3))}, {"dumbbell", dumbbell()}, {"torus", torus(40, 16)}}) {
        const auto d = assemble_mass(m);
        const auto l = assemble_stiffness(m);
        for (double dt : {1e-3, 1e-1}) corpus.emplace_back(fmt("%s D - %g L", name.c_str(), dt), combine(1.0, d, -dt, l));
    }
    corpus.emplace_back("random SPD, 500 vertices", random_spd(grid(24, 19), rng));
    corpus.emplace_back("random SPD, icosphere pattern", random_spd(generate(icosphere_spec(2)), rng));
    const double tol = 1e-12;
    double worst = 0.0;
    for (const auto& [name, a] : corpus) {
        const Eigen::MatrixXd b = Eigen::MatrixXd::Random(a.size(), 3);
        const Eigen::MatrixXd direct = factorize(a).solve(b);
        const Eigen::MatrixXd iterative = solve_cg(a, b, tol, 50000);
        worst = std::max(worst, (direct - iterative).norm() / direct.norm());
    }
    v.check(worst <= std::max(tol, 1e-8), fmt("direct vs CG on %zu SPD systems: worst relative difference %.2e", corpus.size(), worst));
    return v;
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
        {"sphere radius tracking", sphere_tracking},
        {"cylinder radius tracking", cylinder_tracking},
        {"catenoid stationarity", catenoid_stationarity},
        {"dumbbell singularity dichotomy", singularity_dichotomy},
        {"cmcf limit on the dumbbell", cmcf_limit},
        {"stiffness reuse and scale invariance", stiffness_reuse},
        {"energy decomposition identities", energy_identities},
        {"Dirichlet gradient check", gradient_check},
        {"Dirichlet energy monotonicity", energy_monotonicity},
        {"solver failure semantics", solver_failures},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto start = Clock::now();
        Verdict v;
        try {
            v = criteria[i].second();
        } catch (const std::exception& e) {
            v.check(false, std::string("unexpected exception: ") + e.what());
        }
        std::printf("%s %2zu %s (%.1f s)\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), seconds_since(start));
        for (const auto& line : v.details) std::printf("        %s\n", line.c_str());
        std::fflush(stdout);
        failures += v.pass ? 0 : 1;
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
