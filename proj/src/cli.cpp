#include "curvflow/cli.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include "curvflow/errors.hpp"
#include "curvflow/fem.hpp"
#include "curvflow/flow.hpp"
#include "curvflow/mesh_io.hpp"
#include "curvflow/metrics.hpp"
#include "curvflow/metrics_csv.hpp"
#include "curvflow/oracle.hpp"
#include "curvflow/shapes.hpp"
#include "curvflow/svg_plot.hpp"
#include "curvflow/version.hpp"

namespace curvflow::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

constexpr const char* kDefaultOut = "curvflow_out";

struct FlowArgs {
    std::string input;
    std::string shape;
    std::string flow = "cmcf";
    double dt = 1e-3;
    std::size_t steps = 512;
    std::string normalize = "on";
    std::string recenter = "on";
    std::string boundary = "none";
    bool freeze_collapsed = false;
    std::string snapshots = "pow2";
    std::string format = "obj";
    std::string basename;
    std::string out = kDefaultOut;
    std::string metrics_csv;
    std::string solver = "direct";
    double cg_tol = 1e-12;
    std::size_t cg_max_iter = 20000;
    double stop_eps = 0.0;
    bool quiet = false;
};

struct MetricsArgs {
    std::string reference;
    std::vector<std::string> meshes;
    std::string csv;
};

struct OracleArgs {
    std::vector<std::string> cases;
    std::vector<std::string> flows;
    unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
    std::string out = kDefaultOut;
    std::string csv;
    std::string solver = "direct";
};

struct PlotArgs {
    std::vector<std::string> csv;
    std::vector<std::string> labels;
    std::string out = kDefaultOut;
    std::string prefix;
};

std::string real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<std::string> split_list(const std::vector<std::string>& items) {
    std::vector<std::string> out;
    for (const auto& item : items) {
        std::stringstream in(item);
        std::string part;
        while (std::getline(in, part, ',')) {
            if (!part.empty()) out.push_back(part);
        }
    }
    return out;
}

void ensure_directory(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot write " + path.string());
    f << text;
    f.flush();
    if (!f) throw IoError("write failed: " + path.string());
}

ordered_json inventory(const fs::path& root, const std::vector<fs::path>& files) {
    ordered_json list = ordered_json::array();
    for (const auto& p : files) {
        std::error_code ec;
        const auto bytes = fs::file_size(p, ec);
        if (ec) throw IoError("missing output " + p.string());
        list.push_back({{"path", fs::relative(p, root).generic_string()},
                        {"bytes", bytes},
                        {"sha256", sha256_file(p)}});
    }
    return list;
}

// TOML echo of every flow flag; `curvflow flow --config` on it repeats the run.
std::string flow_config_toml(const FlowArgs& a) {
    std::ostringstream s;
    auto str = [&](const char* key, const std::string& v) { s << key << " = \"" << v << "\"\n"; };
    if (!a.input.empty()) str("input", fs::absolute(a.input).string());
    if (!a.shape.empty()) str("shape", a.shape);
    str("flow", a.flow);
    s << "dt = " << real(a.dt) << "\n";
    s << "steps = " << a.steps << "\n";
    str("normalize", a.normalize);
    str("recenter", a.recenter);
    str("boundary", a.boundary);
    s << "freeze-collapsed = " << (a.freeze_collapsed ? "true" : "false") << "\n";
    str("snapshots", a.snapshots);
    str("format", a.format);
    str("basename", a.basename);
    str("solver", a.solver);
    s << "cg-tol = " << real(a.cg_tol) << "\n";
    s << "cg-max-iter = " << a.cg_max_iter << "\n";
    s << "stop-eps = " << real(a.stop_eps) << "\n";
    return s.str();
}

int cmd_flow(FlowArgs a, std::ostream& out, std::ostream& err) {
    const std::string started = utc_timestamp();
    const auto clock_start = std::chrono::steady_clock::now();

    FlowConfig config;
    config.variant = parse_variant(a.flow);
    config.dt = a.dt;
    config.steps = a.steps;
    config.normalize_area = a.normalize == "on";
    config.recenter = a.recenter == "on";
    config.boundary_mode = parse_boundary_mode(a.boundary);
    config.freeze_collapsed = a.freeze_collapsed;
    config.snapshot_schedule = parse_schedule(a.snapshots, a.steps);
    config.stop_eps = a.stop_eps;
    config.solver = parse_solver(a.solver);
    config.cg_tolerance = a.cg_tol;
    config.cg_max_iterations = a.cg_max_iter;
    check_config(config);
    const auto format = parse_format(a.format);
    if (!format) throw SpecError("unknown mesh format '" + a.format + "'");

    TriMesh mesh;
    std::string generator;
    if (!a.input.empty()) {
        mesh = load_mesh(a.input);
        if (a.basename.empty()) a.basename = fs::path(a.input).stem().string();
    } else {
        const ShapeSpec spec = parse_shape_spec(a.shape);
        generator = to_string(spec);
        mesh = generate(spec);
        if (a.basename.empty()) a.basename = std::string(kind_name(spec.kind));
    }

    const fs::path dir = a.out;
    ensure_directory(dir);
    const fs::path csv_path = a.metrics_csv.empty() ? dir / "metrics.csv" : fs::path(a.metrics_csv);
    const fs::path config_path = dir / "run_config.toml";
    const fs::path manifest_path = dir / "manifest.json";

    SnapshotOutput snap;
    snap.directory = dir;
    snap.basename = a.basename;
    snap.format = *format;

    FlowObserver observer;
    if (!a.quiet) {
        observer = [&err](const FlowState&, const MetricRecord& r) {
            if (r.step % 64 == 0) {
                char buf[160];
                std::snprintf(buf, sizeof buf, "step %5zu  delta %.3e  qc %.5f  sphericity %.3e\n", r.step,
                              r.convergence_delta, r.qc_error, r.sphericity_variance);
                err << buf;
            }
        };
    }
    FlowResult result = run(mesh, config, observer, snap);
    const FlowState& state = result.state;

    if (!csv_path.parent_path().empty()) ensure_directory(csv_path.parent_path());
    write_metrics_csv(csv_path, result.records);
    write_text(config_path, flow_config_toml(a));

    std::vector<fs::path> files = result.written;
    files.push_back(csv_path);
    files.push_back(config_path);

    ordered_json manifest;
    manifest["tool"] = "curvflow";
    manifest["version"] = kVersion;
    manifest["command"] = "flow";
    manifest["config"] = {
        {"input", a.input.empty() ? ordered_json(nullptr) : ordered_json(fs::absolute(a.input).string())},
        {"shape", a.shape.empty() ? ordered_json(nullptr) : ordered_json(a.shape)},
        {"generator", generator.empty() ? ordered_json(nullptr) : ordered_json(generator)},
        {"variant", to_string(config.variant)},
        {"dt", config.dt},
        {"steps", config.steps},
        {"normalize_area", config.normalize_area},
        {"recenter", config.recenter},
        {"boundary_mode", to_string(config.boundary_mode)},
        {"freeze_collapsed", config.freeze_collapsed},
        {"snapshots", a.snapshots},
        {"snapshot_schedule", config.snapshot_schedule},
        {"stop_eps", config.stop_eps},
        {"solver", to_string(config.solver)},
        {"cg_tolerance", config.cg_tolerance},
        {"cg_max_iterations", config.cg_max_iterations},
        {"format", std::string(format_name(*format))},
        {"basename", a.basename},
    };
    manifest["started"] = started;
    manifest["finished"] = utc_timestamp();
    manifest["elapsed_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - clock_start).count();
    manifest["mesh"] = {{"vertices", mesh.num_vertices()}, {"faces", mesh.num_faces()}};
    manifest["status"] = to_string(state.status);
    manifest["steps_taken"] = state.step;
    manifest["flow_time"] = state.flow_time;
    if (state.singular) {
        manifest["singular"] = {{"step", state.singular->step},
                                {"cause", state.singular->cause},
                                {"detail", state.singular->detail}};
    } else {
        manifest["singular"] = nullptr;
    }
    manifest["warnings"] = state.warnings;
    manifest["outputs"] = inventory(dir, files);
    write_text(manifest_path, manifest.dump(2) + "\n");

    for (const auto& w : state.warnings) err << "warning: " << w << "\n";
    out << "status " << to_string(state.status) << " after " << state.step << " steps (flow time "
        << real(state.flow_time) << ")";
    if (state.singular) out << ", " << state.singular->cause << " at step " << state.singular->step;
    out << "\nwrote " << files.size() + 1 << " files to " << dir.string() << "\n";
    return state.status == FlowStatus::singular ? kExitSingular : kExitOk;
}

int cmd_metrics(const MetricsArgs& a, std::ostream& out) {
    const TriMesh reference = load_mesh(a.reference);
    const auto stiffness = assemble_stiffness(reference);
    std::ostringstream csv;
    csv << "mesh,qc_error,sphericity_variance,dirichlet_energy,tildeEA,tildeEC,area_energy,conformal_energy,area\n";
    for (const auto& path : a.meshes) {
        const TriMesh evolved = load_mesh(path);
        if (evolved.num_vertices() != reference.num_vertices() || evolved.faces != reference.faces) {
            throw ConnectivityMismatch(path + " does not share the reference connectivity");
        }
        const auto spectrum = stretch_spectrum(reference, evolved.vertices);
        const auto energies = energy_decomposition(spectrum);
        const double area = surface_area(evolved);
        const double sph = sphericity_variance(evolved.vertices, evolved.faces) / area;
        csv << path << ',' << real(qc_error(spectrum)) << ',' << real(sph) << ','
            << real(dirichlet_energy(stiffness, evolved.vertices)) << ',' << real(energies.area_tilde) << ','
            << real(energies.conformal_tilde) << ',' << real(energies.area) << ',' << real(energies.conformal) << ','
            << real(area) << '\n';
    }
    if (a.csv.empty()) {
        out << csv.str();
    } else {
        write_text(a.csv, csv.str());
        out << "wrote " << a.csv << "\n";
    }
    return kExitOk;
}

int cmd_oracle(const OracleArgs& a, std::ostream& out) {
    std::vector<AnalyticShape> shapes;
    for (const auto& s : split_list(a.cases)) {
        if (s != "all") shapes.push_back(parse_analytic_shape(s));
    }
    std::vector<FlowVariant> flows;
    for (const auto& f : split_list(a.flows)) {
        if (f != "all") flows.push_back(parse_variant(f));
    }
    auto cases = select_cases(standard_cases(), shapes, flows);
    const SolverKind solver = parse_solver(a.solver);
    for (auto& c : cases) c.solver = solver;
    if (cases.empty()) throw SpecError("no oracle case matches the selection");

    const auto reports = run_cases(cases, a.jobs);
    write_summary(out, reports);

    const fs::path csv_path = a.csv.empty() ? fs::path(a.out) / "oracle.csv" : fs::path(a.csv);
    if (!csv_path.parent_path().empty()) ensure_directory(csv_path.parent_path());
    std::ostringstream csv;
    write_csv(csv, reports);
    write_text(csv_path, csv.str());
    out << "wrote " << csv_path.string() << "\n";

    const bool all = std::all_of(reports.begin(), reports.end(), [](const auto& r) { return r.pass(); });
    return all ? kExitOk : kExitSingular;
}

int cmd_plot(const PlotArgs& a, std::ostream& out) {
    if (!a.labels.empty() && a.labels.size() != a.csv.size()) {
        throw SpecError("give either no --label or one per --csv");
    }
    std::vector<LabeledRecords> inputs;
    for (std::size_t k = 0; k < a.csv.size(); ++k) {
        LabeledRecords in;
        in.label = a.labels.empty() ? fs::path(a.csv[k]).stem().string() : a.labels[k];
        in.records = read_metrics_csv(fs::path(a.csv[k]));
        inputs.push_back(std::move(in));
    }
    // Repeated stems would make the legend ambiguous.
    if (a.labels.empty()) {
        for (std::size_t k = 0; k < inputs.size(); ++k) {
            for (std::size_t j = 0; j < k; ++j) {
                if (inputs[j].label == inputs[k].label) {
                    inputs[j].label = a.csv[j];
                    inputs[k].label = a.csv[k];
                }
            }
        }
    }
    ensure_directory(a.out);
    for (const auto& p : write_metric_plots(inputs, a.out, a.prefix)) out << "wrote " << p.string() << "\n";
    return kExitOk;
}

// Replaces `--config FILE` after the subcommand by the file's key = value
// pairs, placed before the remaining flags so the command line wins. Keys may
// sit at top level or in a section named after the subcommand.
std::vector<std::string> expand_config(std::vector<std::string> args, const std::vector<std::string>& commands) {
    auto sub = std::find_if(args.begin() + 1, args.end(), [&](const std::string& a) {
        return std::find(commands.begin(), commands.end(), a) != commands.end();
    });
    if (sub == args.end()) return args;
    const std::size_t sub_index = static_cast<std::size_t>(sub - args.begin());
    std::vector<std::string> files;
    std::vector<std::string> rest;
    for (std::size_t i = sub_index + 1; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            files.push_back(args[++i]);
        } else if (args[i].rfind("--config=", 0) == 0) {
            files.push_back(args[i].substr(9));
        } else {
            rest.push_back(args[i]);
        }
    }
    if (files.empty()) return args;
    std::vector<std::string> expanded(args.begin(), args.begin() + static_cast<std::ptrdiff_t>(sub_index) + 1);
    for (const auto& file : files) {
        std::vector<CLI::ConfigItem> items;
        try {
            items = CLI::ConfigTOML().from_file(file);
        } catch (const CLI::FileError& e) {
            throw IoError(e.what());
        }
        for (const auto& item : items) {
            const bool top = item.parents.empty();
            const bool ours = item.parents.size() == 1 && item.parents[0] == args[sub_index];
            if (!(top || ours) || item.name == "++" || item.name == "--") continue;
            for (const auto& value : item.inputs) expanded.push_back("--" + item.name + "=" + value);
        }
    }
    expanded.insert(expanded.end(), rest.begin(), rest.end());
    return expanded;
}

}  // namespace

std::vector<std::size_t> parse_schedule(const std::string& text, std::size_t steps) {
    if (text == "pow2") return pow2_schedule(steps);
    if (text == "none" || text.empty()) return {};
    auto number = [&](const std::string& s) {
        std::size_t used = 0;
        unsigned long long v = 0;
        try {
            v = std::stoull(s, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != s.size() || s.empty() || s[0] == '-') throw SpecError("bad snapshot step '" + s + "'");
        return static_cast<std::size_t>(v);
    };
    if (text.rfind("every:", 0) == 0) return every_schedule(number(text.substr(6)), steps);
    if (text.rfind("list:", 0) == 0) {
        std::vector<std::size_t> out;
        for (const auto& item : split_list({text.substr(5)})) {
            const std::size_t k = number(item);
            if (k <= steps) out.push_back(k);
        }
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }
    throw SpecError("snapshot schedule must be pow2, every:K, list:a,b,... or none (got '" + text + "')");
}

std::string sha256_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
        EVP_MD_CTX_free(ctx);
        throw IoError("sha256 unavailable");
    }
    std::array<char, 1 << 16> buf;
    while (in) {
        in.read(buf.data(), buf.size());
        if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(in.gcount()));
    }
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, digest, &len);
    EVP_MD_CTX_free(ctx);
    std::string hex;
    char byte[3];
    for (unsigned int i = 0; i < len; ++i) {
        std::snprintf(byte, sizeof byte, "%02x", digest[i]);
        hex += byte;
    }
    return hex;
}

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Curvature flows on triangle meshes", "curvflow"};
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);
    app.failure_message(CLI::FailureMessage::help);
    std::string config_file;  // consumed by expand_config; declared for --help

    FlowArgs fa;
    auto* flow = app.add_subcommand("flow", "Run a flow and write snapshots, metrics and a manifest");
    flow->add_option("--config", config_file, "Read options from a TOML file (command-line flags win)");
    auto* in_opt = flow->add_option("--input", fa.input, "Input mesh (obj, off, ply)")->check(CLI::ExistingFile);
    auto* shape_opt = flow->add_option("--shape", fa.shape, "Generator spec, e.g. icosphere:3 or dumbbell:default");
    in_opt->excludes(shape_opt);
    flow->add_option("--flow", fa.flow, "Flow variant")->check(CLI::IsMember({"mcf", "heat", "cmcf"}))->capture_default_str();
    flow->add_option("--dt", fa.dt, "Time step")->check(CLI::PositiveNumber)->capture_default_str();
    flow->add_option("--steps", fa.steps, "Number of steps")->capture_default_str();
    flow->add_option("--normalize", fa.normalize, "Rescale to unit area after each step")
        ->check(CLI::IsMember({"on", "off"}))
        ->capture_default_str();
    flow->add_option("--recenter", fa.recenter, "Move the barycenter to the origin after each step")
        ->check(CLI::IsMember({"on", "off"}))
        ->capture_default_str();
    flow->add_option("--boundary", fa.boundary, "Boundary handling")
        ->check(CLI::IsMember({"none", "fixed"}))
        ->capture_default_str();
    flow->add_flag("--freeze-collapsed", fa.freeze_collapsed, "Pin vertices whose triangles collapsed (mcf)");
    flow->add_option("--snapshots", fa.snapshots, "pow2, every:K, list:a,b,... or none")->capture_default_str();
    flow->add_option("--format", fa.format, "Snapshot format")->check(CLI::IsMember({"obj", "off", "ply"}))->capture_default_str();
    flow->add_option("--basename", fa.basename, "Snapshot file prefix (default: input stem or shape kind)");
    flow->add_option("--out", fa.out, "Output directory")->envname("CURVFLOW_OUT")->capture_default_str();
    flow->add_option("--metrics-csv", fa.metrics_csv, "Metrics CSV path (default: OUT/metrics.csv)");
    flow->add_option("--solver", fa.solver, "Linear solver")->check(CLI::IsMember({"direct", "cg"}))->capture_default_str();
    flow->add_option("--cg-tol", fa.cg_tol, "Relative residual target for cg")->check(CLI::PositiveNumber)->capture_default_str();
    flow->add_option("--cg-max-iter", fa.cg_max_iter, "Iteration limit for cg")->capture_default_str();
    flow->add_option("--stop-eps", fa.stop_eps, "Stop when the max vertex displacement falls below this (0: off)")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    flow->add_flag("--quiet", fa.quiet, "No progress lines");

    MetricsArgs ma;
    auto* metrics = app.add_subcommand("metrics", "Compare evolved meshes with a reference mesh");
    metrics->add_option("--config", config_file, "Read options from a TOML file (command-line flags win)");
    metrics->add_option("--reference", ma.reference, "Reference mesh")->required()->check(CLI::ExistingFile);
    metrics->add_option("meshes", ma.meshes, "Evolved meshes with the reference connectivity")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll)
        ->required()
        ->check(CLI::ExistingFile);
    metrics->add_option("--csv", ma.csv, "Write the table here instead of standard output");

    OracleArgs oa;
    auto* oracle = app.add_subcommand("oracle", "Compare discrete flows with closed-form radius evolutions");
    oracle->add_option("--config", config_file, "Read options from a TOML file (command-line flags win)");
    oracle->add_option("--cases", oa.cases, "Shapes: sphere, cylinder, catenoid (comma separated; default all)")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
    oracle->add_option("--flows", oa.flows, "Flows: mcf, heat, cmcf (comma separated; default all)")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
    oracle->add_option("--jobs", oa.jobs, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
    oracle->add_option("--out", oa.out, "Output directory")->envname("CURVFLOW_OUT")->capture_default_str();
    oracle->add_option("--csv", oa.csv, "Per-step CSV path (default: OUT/oracle.csv)");
    oracle->add_option("--solver", oa.solver, "Linear solver")->check(CLI::IsMember({"direct", "cg"}))->capture_default_str();

    PlotArgs pa;
    auto* plot = app.add_subcommand("plot", "Draw convergence, conformality and sphericity plots from metrics CSVs");
    plot->add_option("--config", config_file, "Read options from a TOML file (command-line flags win)");
    plot->add_option("--csv", pa.csv, "Metrics CSV (repeat to overlay runs)")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll)
        ->required()->check(CLI::ExistingFile);
    plot->add_option("--label", pa.labels, "Legend label per --csv, in order")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
    plot->add_option("--out", pa.out, "Output directory")->envname("CURVFLOW_OUT")->capture_default_str();
    plot->add_option("--prefix", pa.prefix, "File name prefix");

    try {
        std::vector<std::string> args(argv, argv + argc);
        args = expand_config(std::move(args), {"flow", "metrics", "oracle", "plot"});
        // CLI11 consumes the vector from the back.
        std::reverse(args.begin() + 1, args.end());
        args.erase(args.begin());
        app.parse(args);
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (flow->parsed()) {
            if (fa.input.empty() && fa.shape.empty()) {
                err << "flow: one of --input or --shape is required\n" << flow->help();
                return kExitUsage;
            }
            return cmd_flow(fa, out, err);
        }
        if (metrics->parsed()) return cmd_metrics(ma, out);
        if (oracle->parsed()) return cmd_oracle(oa, out);
        if (plot->parsed()) return cmd_plot(pa, out);
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}

}  // namespace curvflow::cli
