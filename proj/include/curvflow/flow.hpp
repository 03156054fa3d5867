#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "curvflow/cholesky.hpp"
#include "curvflow/fem.hpp"
#include "curvflow/mesh.hpp"
#include "curvflow/mesh_io.hpp"
#include "curvflow/metrics.hpp"
#include "curvflow/sparse_matrix.hpp"

namespace curvflow {

enum class FlowVariant { mcf, heat, cmcf };
enum class BoundaryMode { none, fixed };
enum class SolverKind { direct, cg };
enum class FlowStatus { running, converged, singular, finished };

[[nodiscard]] const char* to_string(FlowVariant v) noexcept;
[[nodiscard]] const char* to_string(BoundaryMode m) noexcept;
[[nodiscard]] const char* to_string(SolverKind s) noexcept;
[[nodiscard]] const char* to_string(FlowStatus s) noexcept;
// Throw SpecError on unknown names.
[[nodiscard]] FlowVariant parse_variant(const std::string& name);
[[nodiscard]] BoundaryMode parse_boundary_mode(const std::string& name);
[[nodiscard]] SolverKind parse_solver(const std::string& name);

struct FlowConfig {
    FlowVariant variant = FlowVariant::cmcf;
    double dt = 1e-3;
    std::size_t steps = 512;
    bool normalize_area = true;
    bool recenter = true;
    BoundaryMode boundary_mode = BoundaryMode::none;
    bool freeze_collapsed = false;  // mcf only
    std::vector<std::size_t> snapshot_schedule;
    double stop_eps = 0.0;  // 0 disables the convergence test
    SolverKind solver = SolverKind::direct;
    double cg_tolerance = 1e-12;
    std::size_t cg_max_iterations = 20000;
    StiffnessOptions stiffness;
};

// Throws SpecError for dt <= 0, non-finite dt, stop_eps < 0 and bad CG
// settings.
void check_config(const FlowConfig& config);

// Snapshot step lists: 1, 2, 4, ... up to `steps`; every k-th step; or an
// explicit list.
[[nodiscard]] std::vector<std::size_t> pow2_schedule(std::size_t steps);
[[nodiscard]] std::vector<std::size_t> every_schedule(std::size_t k, std::size_t steps);

struct SingularEvent {
    std::size_t step = 0;  // the step whose solve failed
    std::string cause;     // not_positive_definite, degenerate_triangle, cg_breakdown, cg_max_iterations, non_finite
    std::string detail;
};

struct FlowState {
    TriMesh rest;           // input connectivity and embedding at t = 0
    Positions positions;    // current embedding
    std::size_t step = 0;
    double flow_time = 0.0;  // sum of dt over taken steps, independent of rescaling
    FlowStatus status = FlowStatus::running;
    std::optional<SingularEvent> singular;
    std::vector<std::string> warnings;

    std::shared_ptr<const SparseSymMatrix> rest_mass;       // D0
    std::shared_ptr<const SparseSymMatrix> rest_stiffness;  // L0
    std::shared_ptr<const SparseSymMatrix> mass;       // D used by the most recent step (D0 before any step)
    std::shared_ptr<const SparseSymMatrix> stiffness;  // L used by the most recent step (L0 before any step)

    std::vector<bool> constrained;   // vertices held in place
    std::vector<bool> active_faces;  // false once frozen out of the system
    std::vector<double> rest_areas;

    std::shared_ptr<const FemAssembler> assembler;
    std::shared_ptr<const CholeskySymbolic> symbolic;
    std::shared_ptr<const SparseSymMatrix> cached_system;       // heat only: D0 - dt L0 before elimination
    std::shared_ptr<const Factorization> cached_factorization;  // heat only

    [[nodiscard]] bool done() const noexcept { return status != FlowStatus::running; }
};

// Assembles D0 and L0 on the input. Propagates DegenerateTriangle, and the
// mesh validation errors.
[[nodiscard]] FlowState init(const TriMesh& mesh, const FlowConfig& config);

// Advances one step. Numerical failures never escape: they set status to
// singular and leave positions at the last valid step. Returns `state`.
FlowState& step(FlowState& state, const FlowConfig& config);

// Positions scaled about the area-weighted centroid to unit area, then
// optionally translated so that centroid sits at the origin.
[[nodiscard]] Positions normalize_positions(const Positions& positions, std::span<const Face> faces, bool scale,
                                            bool recenter);

// Measurements of `positions` against the rest mesh. `prev` and `mass` feed
// the convergence delta; `raw` holds the positions before renormalization
// (equal to `positions` when no renormalization happened).
[[nodiscard]] MetricRecord measure(const FlowState& state, const Positions& raw, const Positions& prev,
                                   const SparseSymMatrix& mass);

struct Snapshot {
    std::size_t step = 0;
    Positions positions;
};

struct SnapshotOutput {
    std::filesystem::path directory;
    std::string basename = "mesh";
    MeshFormat format = MeshFormat::obj;
    SaveOptions options;
};

// `{basename}_step{index:05}.{ext}`
[[nodiscard]] std::string snapshot_filename(const std::string& basename, std::size_t step, MeshFormat format);

struct FlowResult {
    FlowState state;
    std::vector<MetricRecord> records;  // records[0] is step 0
    std::vector<Snapshot> snapshots;
    std::vector<std::filesystem::path> written;  // snapshot files, in schedule order
};

using FlowObserver = std::function<void(const FlowState&, const MetricRecord&)>;

// Runs until the step budget is spent, the displacement test passes or a
// step fails. Throws IoError when a snapshot cannot be written.
[[nodiscard]] FlowResult run(const TriMesh& mesh, const FlowConfig& config, const FlowObserver& observer = {},
                             const std::optional<SnapshotOutput>& output = std::nullopt);

}  // namespace curvflow
