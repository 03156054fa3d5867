#include "curvflow/flow.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <system_error>

#include "curvflow/errors.hpp"

namespace curvflow {
namespace {

struct StepTrace {
    Positions prev;
    Positions raw;
};

bool any_of(const std::vector<bool>& flags) {
    return std::find(flags.begin(), flags.end(), true) != flags.end();
}

// Constrained rows and columns become a scaled identity; the coupling to the
// free rows moves to the right-hand side. The pattern is left untouched so
// the symbolic analysis stays valid.
void eliminate(SparseSymMatrix& a, Positions& rhs, const Positions& x, const std::vector<bool>& constrained) {
    auto& s = a.storage();
    const int n = static_cast<int>(s.cols());
    const int* outer = s.outerIndexPtr();
    const int* inner = s.innerIndexPtr();
    double* v = s.valuePtr();

    double scale = 0.0;
    for (int j = 0; j < n; ++j) {
        if (constrained[j]) continue;
        for (int p = outer[j]; p < outer[j + 1]; ++p) {
            if (inner[p] == j) scale = std::max(scale, std::abs(v[p]));
        }
    }
    if (!(scale > 0.0)) scale = 1.0;

    for (int j = 0; j < n; ++j) {
        for (int p = outer[j]; p < outer[j + 1]; ++p) {
            const int i = inner[p];
            if (!constrained[i] && !constrained[j]) continue;
            if (i == j) {
                v[p] = scale;
                continue;
            }
            if (!constrained[i]) rhs.row(i) -= v[p] * x.row(j);
            v[p] = 0.0;
        }
    }
    for (int i = 0; i < n; ++i) {
        if (constrained[i]) rhs.row(i) = scale * x.row(i);
    }
}

// Right-hand side correction for a matrix whose elimination is cached.
void fold_constraints(const SparseSymMatrix& a, Positions& rhs, const Positions& x,
                      const std::vector<bool>& constrained, double scale) {
    const auto& s = a.storage();
    const int n = static_cast<int>(s.cols());
    for (int j = 0; j < n; ++j) {
        if (!constrained[j]) continue;
        for (SparseSymMatrix::Storage::InnerIterator it(s, j); it; ++it) {
            const auto i = it.row();
            if (!constrained[i]) rhs.row(i) -= it.value() * x.row(j);
        }
    }
    for (int i = 0; i < n; ++i) {
        if (constrained[i]) rhs.row(i) = scale * x.row(i);
    }
}

double eliminated_scale(const SparseSymMatrix& eliminated, const std::vector<bool>& constrained) {
    for (std::size_t i = 0; i < constrained.size(); ++i) {
        if (constrained[i]) return eliminated.coeff(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i));
    }
    return 1.0;
}

// Drops triangles that fell below the degeneracy threshold and pins vertices
// left without any active triangle. Returns false when nothing is left.
bool freeze_collapsed(FlowState& state) {
    const auto areas = triangle_areas(state.positions, state.rest.faces);
    double mean = 0.0;
    std::size_t count = 0;
    for (std::size_t f = 0; f < areas.size(); ++f) {
        if (!state.active_faces[f]) continue;
        mean += areas[f];
        ++count;
    }
    if (count == 0) return false;
    mean /= static_cast<double>(count);
    std::size_t frozen = 0;
    for (std::size_t f = 0; f < areas.size(); ++f) {
        if (state.active_faces[f] && !(areas[f] > kDegenerateAreaRatio * mean)) {
            state.active_faces[f] = false;
            ++frozen;
        }
    }
    if (frozen == 0) return true;
    std::vector<bool> supported(state.positions.rows(), false);
    for (std::size_t f = 0; f < areas.size(); ++f) {
        if (!state.active_faces[f]) continue;
        for (int v : state.rest.faces[f]) supported[v] = true;
    }
    for (std::size_t v = 0; v < supported.size(); ++v) {
        if (!supported[v]) state.constrained[v] = true;
    }
    state.warnings.push_back("step " + std::to_string(state.step + 1) + ": froze " + std::to_string(frozen) +
                             " collapsed triangles");
    return std::find(state.active_faces.begin(), state.active_faces.end(), true) != state.active_faces.end();
}

void mark_singular(FlowState& state, std::size_t at, std::string cause, std::string detail) {
    state.status = FlowStatus::singular;
    state.singular = SingularEvent{at, std::move(cause), std::move(detail)};
}

Positions solve_system(FlowState& state, const FlowConfig& config, const SparseSymMatrix& d,
                       const SparseSymMatrix& l, const Positions& x) {
    Positions rhs = d.storage() * x;
    const bool has_constraints = any_of(state.constrained);

    if (config.variant == FlowVariant::heat && state.cached_factorization) {
        if (has_constraints) {
            fold_constraints(*state.cached_system, rhs, x, state.constrained,
                             eliminated_scale(*state.cached_system, state.constrained));
        }
        return state.cached_factorization->solve(rhs);
    }

    SparseSymMatrix a = combine(1.0, d, -config.dt, l);
    const auto original = config.variant == FlowVariant::heat ? std::make_shared<const SparseSymMatrix>(a) : nullptr;
    if (has_constraints) eliminate(a, rhs, x, state.constrained);

    if (config.solver == SolverKind::cg) return solve_cg(a, rhs, config.cg_tolerance, config.cg_max_iterations);

    auto f = std::make_shared<const Factorization>(a, state.symbolic);
    state.symbolic = f->symbolic();
    if (config.variant == FlowVariant::heat) {
        state.cached_system = original;
        state.cached_factorization = f;
    }
    return f->solve(rhs);
}

bool advance(FlowState& state, const FlowConfig& config, StepTrace& trace) {
    if (state.done()) return false;
    const std::size_t at = state.step + 1;
    trace.prev = state.positions;
    const Positions& x = state.positions;
    Positions next;
    try {
        std::shared_ptr<const SparseSymMatrix> d;
        std::shared_ptr<const SparseSymMatrix> l;
        switch (config.variant) {
            case FlowVariant::mcf:
                if (config.freeze_collapsed && !freeze_collapsed(state)) {
                    mark_singular(state, at, "degenerate_triangle", "every triangle collapsed");
                    return false;
                }
                d = std::make_shared<const SparseSymMatrix>(state.assembler->mass(x, state.active_faces));
                l = std::make_shared<const SparseSymMatrix>(
                    state.assembler->stiffness(x, state.active_faces, config.stiffness));
                break;
            case FlowVariant::cmcf:
                d = std::make_shared<const SparseSymMatrix>(state.assembler->mass(x));
                l = state.rest_stiffness;
                break;
            case FlowVariant::heat:
                d = state.rest_mass;
                l = state.rest_stiffness;
                break;
        }
        next = solve_system(state, config, *d, *l, x);
        state.mass = std::move(d);
        state.stiffness = std::move(l);
    } catch (const NotPositiveDefinite& e) {
        mark_singular(state, at, "not_positive_definite", e.what());
        return false;
    } catch (const DegenerateTriangle& e) {
        mark_singular(state, at, "degenerate_triangle", e.what());
        return false;
    } catch (const Breakdown& e) {
        mark_singular(state, at, "cg_breakdown", e.what());
        return false;
    } catch (const MaxIterations& e) {
        mark_singular(state, at, "cg_max_iterations", e.what());
        return false;
    }
    if (!next.allFinite()) {
        mark_singular(state, at, "non_finite", "solution has non-finite coordinates");
        return false;
    }
    for (Eigen::Index i = 0; i < next.rows(); ++i) {
        if (state.constrained[static_cast<std::size_t>(i)]) next.row(i) = x.row(i);
    }

    trace.raw = next;
    const bool rescale = config.normalize_area && config.boundary_mode != BoundaryMode::fixed;
    const bool shift = config.recenter && config.boundary_mode != BoundaryMode::fixed;
    if (rescale || shift) {
        if (!(surface_area(next, state.rest.faces) > 0.0)) {
            mark_singular(state, at, "degenerate_triangle", "surface area vanished");
            return false;
        }
        next = normalize_positions(next, state.rest.faces, rescale, shift);
    }

    state.positions = std::move(next);
    state.step = at;
    state.flow_time += config.dt;
    if (state.step >= config.steps) state.status = FlowStatus::finished;
    if (config.stop_eps > 0.0 && state.status == FlowStatus::running) {
        const double moved = (state.positions - trace.prev).rowwise().norm().maxCoeff();
        if (moved < config.stop_eps) state.status = FlowStatus::converged;
    }
    return true;
}

}  // namespace

const char* to_string(FlowVariant v) noexcept {
    switch (v) {
        case FlowVariant::mcf: return "mcf";
        case FlowVariant::heat: return "heat";
        case FlowVariant::cmcf: return "cmcf";
    }
    return "?";
}

const char* to_string(BoundaryMode m) noexcept { return m == BoundaryMode::fixed ? "fixed" : "none"; }

const char* to_string(SolverKind s) noexcept { return s == SolverKind::cg ? "cg" : "direct"; }

const char* to_string(FlowStatus s) noexcept {
    switch (s) {
        case FlowStatus::running: return "running";
        case FlowStatus::converged: return "converged";
        case FlowStatus::singular: return "singular";
        case FlowStatus::finished: return "finished";
    }
    return "?";
}

FlowVariant parse_variant(const std::string& name) {
    if (name == "mcf") return FlowVariant::mcf;
    if (name == "heat") return FlowVariant::heat;
    if (name == "cmcf") return FlowVariant::cmcf;
    throw SpecError("unknown flow '" + name + "' (expected mcf, heat or cmcf)");
}

BoundaryMode parse_boundary_mode(const std::string& name) {
    if (name == "none") return BoundaryMode::none;
    if (name == "fixed") return BoundaryMode::fixed;
    throw SpecError("unknown boundary mode '" + name + "' (expected none or fixed)");
}

SolverKind parse_solver(const std::string& name) {
    if (name == "direct") return SolverKind::direct;
    if (name == "cg") return SolverKind::cg;
    throw SpecError("unknown solver '" + name + "' (expected direct or cg)");
}

void check_config(const FlowConfig& config) {
    if (!std::isfinite(config.dt) || !(config.dt > 0.0)) throw SpecError("dt must be a positive number");
    if (!std::isfinite(config.stop_eps) || config.stop_eps < 0.0) throw SpecError("stop_eps must be >= 0");
    if (config.solver == SolverKind::cg) {
        if (!(config.cg_tolerance > 0.0)) throw SpecError("cg tolerance must be positive");
        if (config.cg_max_iterations == 0) throw SpecError("cg iteration limit must be positive");
    }
    if (config.stiffness.cot_clamp < 0.0) throw SpecError("cotangent clamp must be >= 0");
}

std::vector<std::size_t> pow2_schedule(std::size_t steps) {
    std::vector<std::size_t> out;
    for (std::size_t k = 1; k <= steps; k *= 2) out.push_back(k);
    return out;
}

std::vector<std::size_t> every_schedule(std::size_t k, std::size_t steps) {
    if (k == 0) throw SpecError("snapshot interval must be positive");
    std::vector<std::size_t> out;
    for (std::size_t s = k; s <= steps; s += k) out.push_back(s);
    return out;
}

FlowState init(const TriMesh& mesh, const FlowConfig& config) {
    check_config(config);
    validate(mesh);
    FlowState state;
    state.rest = mesh;
    state.positions = mesh.vertices;
    auto assembler = std::make_shared<const FemAssembler>(mesh);
    state.assembler = assembler;
    state.rest_areas = assembler->checked_areas(mesh.vertices);
    state.rest_mass = std::make_shared<const SparseSymMatrix>(assembler->mass(mesh.vertices));
    state.rest_stiffness = std::make_shared<const SparseSymMatrix>(assembler->stiffness(mesh.vertices, config.stiffness));
    state.mass = state.rest_mass;
    state.stiffness = state.rest_stiffness;
    state.active_faces.assign(mesh.num_faces(), true);
    state.constrained.assign(mesh.num_vertices(), false);

    bool has_boundary = false;
    for (std::size_t v = 0; v < mesh.num_vertices(); ++v) {
        if (mesh.has_tag(v, kTagBoundary)) has_boundary = true;
        if (mesh.has_tag(v, kTagFrozen)) state.constrained[v] = true;
    }
    if (config.boundary_mode == BoundaryMode::fixed) {
        if (!has_boundary) state.warnings.push_back("boundary mode fixed, but the mesh has no tagged boundary");
        for (std::size_t v = 0; v < mesh.num_vertices(); ++v) {
            if (mesh.has_tag(v, kTagBoundary)) state.constrained[v] = true;
        }
        if (config.normalize_area || config.recenter) {
            state.warnings.push_back("fixed boundary: area normalization and recentering are skipped");
        }
    } else if (has_boundary) {
        state.warnings.push_back("mesh has a boundary but boundary mode is none; the boundary moves freely");
    }
    if (config.freeze_collapsed && config.variant != FlowVariant::mcf) {
        state.warnings.push_back("freeze_collapsed only applies to mcf; ignored");
    }
    if (config.steps == 0) state.status = FlowStatus::finished;
    return state;
}

FlowState& step(FlowState& state, const FlowConfig& config) {
    StepTrace trace;
    advance(state, config, trace);
    return state;
}

Positions normalize_positions(const Positions& positions, std::span<const Face> faces, bool scale, bool recenter) {
    const Eigen::RowVector3d center = surface_centroid(positions, faces).transpose();
    double s = 1.0;
    if (scale) s = 1.0 / std::sqrt(surface_area(positions, faces));
    Positions out = (positions.rowwise() - center) * s;
    if (!recenter) out.rowwise() += center;
    return out;
}

MetricRecord measure(const FlowState& state, const Positions& raw, const Positions& prev, const SparseSymMatrix& mass) {
    MetricRecord rec;
    rec.step = state.step;
    rec.flow_time = state.flow_time;
    rec.status = to_string(state.status);

    const auto& faces = state.rest.faces;
    const auto areas = triangle_areas(state.positions, faces);
    for (double a : areas) rec.area += a;
    rec.min_tri_area_ratio = min_triangle_area_ratio(state.rest_areas, areas);
    rec.sphericity_variance = rec.area > 0.0 ? sphericity_variance(state.positions, faces) / rec.area : 0.0;
    rec.convergence_delta = convergence_delta(prev, state.positions, mass);
    rec.max_displacement = prev.rows() > 0 ? (state.positions - prev).rowwise().norm().maxCoeff() : 0.0;

    const auto spectrum = stretch_spectrum(state.rest, raw);
    rec.qc_error = qc_error(spectrum);
    rec.dirichlet_energy = dirichlet_energy(*state.rest_stiffness, raw);
    const double raw_area = surface_area(raw, faces);
    rec.dirichlet_energy_normalized = raw_area > 0.0 ? rec.dirichlet_energy / raw_area : 0.0;
    try {
        const auto e = energy_decomposition(spectrum);
        rec.area_energy_tilde = e.area_tilde;
        rec.conformal_energy_tilde = e.conformal_tilde;
        rec.area_energy = e.area;
        rec.conformal_energy = e.conformal;
    } catch (const DegenerateTriangle&) {
        rec.area_energy_tilde = rec.conformal_energy_tilde = std::nan("");
        rec.area_energy = rec.conformal_energy = std::nan("");
    }
    return rec;
}

std::string snapshot_filename(const std::string& basename, std::size_t step, MeshFormat format) {
    char index[32];
    std::snprintf(index, sizeof index, "%05zu", step);
    return basename + "_step" + index + "." + std::string(format_name(format));
}

FlowResult run(const TriMesh& mesh, const FlowConfig& config, const FlowObserver& observer,
               const std::optional<SnapshotOutput>& output) {
    FlowResult result;
    result.state = init(mesh, config);
    FlowState& state = result.state;

    std::vector<std::size_t> schedule = config.snapshot_schedule;
    std::sort(schedule.begin(), schedule.end());
    schedule.erase(std::unique(schedule.begin(), schedule.end()), schedule.end());
    std::size_t next_snapshot = 0;

    if (output) {
        std::error_code ec;
        std::filesystem::create_directories(output->directory, ec);
        if (ec) throw IoError("cannot create " + output->directory.string() + ": " + ec.message());
    }
    auto snapshot = [&] {
        while (next_snapshot < schedule.size() && schedule[next_snapshot] < state.step) ++next_snapshot;
        if (next_snapshot >= schedule.size() || schedule[next_snapshot] != state.step) return;
        ++next_snapshot;
        result.snapshots.push_back({state.step, state.positions});
        if (!output) return;
        TriMesh m{state.positions, state.rest.faces, state.rest.tags};
        const auto path = output->directory / snapshot_filename(output->basename, state.step, output->format);
        save_mesh(m, path, output->format, output->options);
        result.written.push_back(path);
    };

    auto record = [&](MetricRecord rec) {
        result.records.push_back(std::move(rec));
        if (observer) observer(state, result.records.back());
    };

    record(measure(state, state.positions, state.positions, *state.rest_mass));
    snapshot();

    StepTrace trace;
    while (!state.done()) {
        if (!advance(state, config, trace)) break;
        record(measure(state, trace.raw, trace.prev, *state.mass));
        snapshot();
    }
    if (!result.records.empty()) result.records.back().status = to_string(state.status);
    return result;
}

}  // namespace curvflow
