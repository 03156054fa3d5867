#include "curvflow/shapes.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <utility>

#include "curvflow/errors.hpp"

namespace curvflow {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// ---------------------------------------------------------------------------
// Surfaces of revolution
// ---------------------------------------------------------------------------

struct Ring {
    double z = 0.0;
    double r = 0.0;
    int count = 0;
    bool boundary = false;
};

// Rings are listed bottom to top. Vertices are numbered ring by ring, then the
// bottom pole, then the top pole.
struct RevolutionLayout {
    std::vector<Ring> rings;
    std::optional<double> bottom_pole;
    std::optional<double> top_pole;
    std::size_t mid_ring = 0;
};

std::size_t nearest_ring(const std::vector<Ring>& rings, double z, std::size_t first, std::size_t last) {
    std::size_t best = first;
    for (std::size_t k = first; k < last; ++k) {
        if (std::abs(rings[k].z - z) < std::abs(rings[best].z - z) - 1e-12) best = k;
    }
    return best;
}

// Triangles between two closed rings, merging by angle. `a` is the lower ring.
void stitch(std::vector<Face>& faces, int a0, int na, int b0, int nb) {
    int i = 0, j = 0;
    auto va = [&](int k) { return a0 + (k % na); };
    auto vb = [&](int k) { return b0 + (k % nb); };
    while (i < na || j < nb) {
        const double next_a = static_cast<double>(i + 1) / na;
        const double next_b = static_cast<double>(j + 1) / nb;
        if (j >= nb || (i < na && next_a < next_b)) {
            faces.push_back({va(i), va(i + 1), vb(j)});
            ++i;
        } else {
            faces.push_back({va(i), vb(j + 1), vb(j)});
            ++j;
        }
    }
}

TriMesh build_revolution(const RevolutionLayout& layout) {
    std::size_t nv = 0;
    std::vector<int> start;
    for (const auto& ring : layout.rings) {
        start.push_back(static_cast<int>(nv));
        nv += static_cast<std::size_t>(ring.count);
    }
    const int bottom = layout.bottom_pole ? static_cast<int>(nv++) : -1;
    const int top = layout.top_pole ? static_cast<int>(nv++) : -1;

    TriMesh mesh;
    mesh.vertices.resize(static_cast<Eigen::Index>(nv), 3);
    mesh.tags.assign(nv, kTagNone);
    bool any_boundary = false;
    for (std::size_t k = 0; k < layout.rings.size(); ++k) {
        const auto& ring = layout.rings[k];
        for (int i = 0; i < ring.count; ++i) {
            const double theta = kTwoPi * i / ring.count;
            const auto v = static_cast<Eigen::Index>(start[k] + i);
            mesh.vertices.row(v) << ring.r * std::cos(theta), ring.r * std::sin(theta), ring.z;
            if (ring.boundary) {
                mesh.tags[static_cast<std::size_t>(v)] = kTagBoundary;
                any_boundary = true;
            }
        }
    }
    if (bottom >= 0) mesh.vertices.row(bottom) << 0.0, 0.0, *layout.bottom_pole;
    if (top >= 0) mesh.vertices.row(top) << 0.0, 0.0, *layout.top_pole;
    if (!any_boundary) mesh.tags.clear();

    for (std::size_t k = 0; k + 1 < layout.rings.size(); ++k) {
        stitch(mesh.faces, start[k], layout.rings[k].count, start[k + 1], layout.rings[k + 1].count);
    }
    if (bottom >= 0) {
        const int n = layout.rings.front().count;
        for (int i = 0; i < n; ++i) mesh.faces.push_back({bottom, start.front() + (i + 1) % n, start.front() + i});
    }
    if (top >= 0) {
        const int n = layout.rings.back().count;
        for (int i = 0; i < n; ++i) mesh.faces.push_back({start.back() + i, start.back() + (i + 1) % n, top});
    }
    return mesh;
}

RevolutionLayout cylinder_layout(const ShapeSpec& spec) {
    RevolutionLayout layout;
    const double half = 0.5 * spec.height;
    const int nt = spec.angular_samples;
    const int nz = spec.axial_samples;
    const double dz = spec.height / (nz - 1);
    const int ncap = std::max(1, static_cast<int>(std::lround(spec.radius / dz)));
    auto cap_count = [&](int k) { return std::clamp(static_cast<int>(std::lround(double(nt) * k / ncap)), 6, nt); };

    if (spec.caps) {
        layout.bottom_pole = -half;
        for (int k = 1; k < ncap; ++k) layout.rings.push_back({-half, spec.radius * k / ncap, cap_count(k), false});
    }
    const std::size_t wall_first = layout.rings.size();
    for (int k = 0; k < nz; ++k) {
        const bool edge = (k == 0 || k == nz - 1);
        layout.rings.push_back({-half + dz * k, spec.radius, nt, edge && !spec.caps});
    }
    const std::size_t wall_last = layout.rings.size();
    if (spec.caps) {
        for (int k = ncap - 1; k >= 1; --k) layout.rings.push_back({half, spec.radius * k / ncap, cap_count(k), false});
        layout.top_pole = half;
    }
    layout.mid_ring = nearest_ring(layout.rings, 0.0, wall_first, wall_last);
    return layout;
}

RevolutionLayout catenoid_layout(const ShapeSpec& spec) {
    RevolutionLayout layout;
    const int nz = spec.axial_samples;
    for (int k = 0; k < nz; ++k) {
        const double z = spec.z_min + (spec.z_max - spec.z_min) * k / (nz - 1);
        layout.rings.push_back({z, std::cosh(z), spec.angular_samples, k == 0 || k == nz - 1});
    }
    layout.mid_ring = nearest_ring(layout.rings, 0.5 * (spec.z_min + spec.z_max), 0, layout.rings.size());
    return layout;
}

double dumbbell_extent(const ShapeSpec& spec) { return spec.bulb_offset + spec.bulb_radius; }

// Rings at equal arclength along the profile, symmetric about z = 0, with
// per-ring vertex counts matched to the arclength spacing (capped by
// angular_samples) so triangles stay close to isotropic.
RevolutionLayout dumbbell_layout(const ShapeSpec& spec) {
    const double extent = dumbbell_extent(spec);
    // Dense polyline in the half plane z >= 0, clustered towards the pole.
    constexpr int kDense = 20000;
    std::vector<double> zs(kDense + 1), arc(kDense + 1, 0.0);
    for (int k = 0; k <= kDense; ++k) zs[k] = extent * std::sin(0.5 * std::numbers::pi * k / kDense);
    for (int k = 1; k <= kDense; ++k) {
        arc[k] = arc[k - 1] + std::hypot(zs[k] - zs[k - 1], dumbbell_profile(spec, zs[k]) - dumbbell_profile(spec, zs[k - 1]));
    }
    const double half_length = arc.back();

    // Odd ring count so that one ring sits on the neck.
    int rings = spec.axial_samples;
    if (rings % 2 == 0) ++rings;
    const int half_rings = rings / 2;
    const double ds = half_length / (half_rings + 1);

    std::vector<double> upper;  // z of rings 1..half_rings above the neck
    for (int k = 1; k <= half_rings; ++k) {
        const double target = ds * k;
        const auto it = std::lower_bound(arc.begin(), arc.end(), target);
        const auto hi = static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(it - arc.begin(), 1, kDense));
        const double w = (target - arc[hi - 1]) / (arc[hi] - arc[hi - 1]);
        upper.push_back(zs[hi - 1] + w * (zs[hi] - zs[hi - 1]));
    }

    auto count_for = [&](double r) {
        return std::clamp(static_cast<int>(std::lround(kTwoPi * r / ds)), 6, spec.angular_samples);
    };
    RevolutionLayout layout;
    for (int k = half_rings - 1; k >= 0; --k) {
        const double z = -upper[static_cast<std::size_t>(k)];
        const double r = dumbbell_profile(spec, z);
        layout.rings.push_back({z, r, count_for(r), false});
    }
    layout.rings.push_back({0.0, dumbbell_profile(spec, 0.0), count_for(dumbbell_profile(spec, 0.0)), false});
    layout.mid_ring = layout.rings.size() - 1;
    for (int k = 0; k < half_rings; ++k) {
        const double z = upper[static_cast<std::size_t>(k)];
        const double r = dumbbell_profile(spec, z);
        layout.rings.push_back({z, r, count_for(r), false});
    }
    layout.bottom_pole = -extent;
    layout.top_pole = extent;
    return layout;
}

RevolutionLayout revolution_layout(const ShapeSpec& spec) {
    RevolutionLayout layout;
    const auto& p = spec.profile;
    const bool bottom_pole = p.front().r == 0.0;
    const bool top_pole = p.back().r == 0.0;
    const std::size_t first = bottom_pole ? 1 : 0;
    const std::size_t last = top_pole ? p.size() - 1 : p.size();
    if (bottom_pole) layout.bottom_pole = p.front().z;
    if (top_pole) layout.top_pole = p.back().z;
    for (std::size_t k = first; k < last; ++k) {
        const bool boundary = (k == 0 && !bottom_pole) || (k + 1 == p.size() && !top_pole);
        layout.rings.push_back({p[k].z, p[k].r, spec.angular_samples, boundary});
    }
    layout.mid_ring = nearest_ring(layout.rings, 0.5 * (p.front().z + p.back().z), 0, layout.rings.size());
    return layout;
}

RevolutionLayout layout_for(const ShapeSpec& spec) {
    switch (spec.kind) {
        case ShapeKind::cylinder: return cylinder_layout(spec);
        case ShapeKind::catenoid: return catenoid_layout(spec);
        case ShapeKind::dumbbell: return dumbbell_layout(spec);
        case ShapeKind::revolution: return revolution_layout(spec);
        case ShapeKind::icosphere: break;
    }
    throw SpecError("icosphere has no ring structure");
}

// ---------------------------------------------------------------------------
// Icosphere
// ---------------------------------------------------------------------------

TriMesh icosphere(int subdivisions, double radius) {
    const double phi = 0.5 * (1.0 + std::sqrt(5.0));
    std::vector<Eigen::Vector3d> verts = {
        {-1, phi, 0}, {1, phi, 0}, {-1, -phi, 0}, {1, -phi, 0},  //
        {0, -1, phi}, {0, 1, phi}, {0, -1, -phi}, {0, 1, -phi},  //
        {phi, 0, -1}, {phi, 0, 1}, {-phi, 0, -1}, {-phi, 0, 1},
    };
    for (auto& v : verts) v.normalize();
    std::vector<Face> faces = {
        {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
        {11, 10, 2}, {10, 7, 6}, {7, 1, 8},  {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
        {3, 8, 9},  {4, 9, 5},  {2, 4, 11}, {6, 2, 10}, {8, 6, 7},   {9, 8, 1},
    };
    for (int level = 0; level < subdivisions; ++level) {
        std::map<std::pair<int, int>, int> midpoint;
        auto mid = [&](int a, int b) {
            const std::pair key{std::min(a, b), std::max(a, b)};
            if (auto it = midpoint.find(key); it != midpoint.end()) return it->second;
            verts.push_back((verts[static_cast<std::size_t>(a)] + verts[static_cast<std::size_t>(b)]).normalized());
            const int id = static_cast<int>(verts.size()) - 1;
            midpoint.emplace(key, id);
            return id;
        };
        std::vector<Face> next;
        next.reserve(faces.size() * 4);
        for (const auto& f : faces) {
            const int ab = mid(f[0], f[1]), bc = mid(f[1], f[2]), ca = mid(f[2], f[0]);
            next.push_back({f[0], ab, ca});
            next.push_back({f[1], bc, ab});
            next.push_back({f[2], ca, bc});
            next.push_back({ab, bc, ca});
        }
        faces = std::move(next);
    }
    TriMesh mesh;
    mesh.vertices.resize(static_cast<Eigen::Index>(verts.size()), 3);
    for (std::size_t i = 0; i < verts.size(); ++i) mesh.vertices.row(static_cast<Eigen::Index>(i)) = radius * verts[i].transpose();
    mesh.faces = std::move(faces);
    return mesh;
}

// ---------------------------------------------------------------------------
// Spec strings
// ---------------------------------------------------------------------------

double parse_double(std::string_view s, std::string_view key) {
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw SpecError("bad number '" + std::string(s) + "' for '" + std::string(key) + "'");
    }
    return value;
}

int parse_int(std::string_view s, std::string_view key) {
    int value = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw SpecError("bad integer '" + std::string(s) + "' for '" + std::string(key) + "'");
    }
    return value;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> parts;
    std::size_t pos = 0;
    while (true) {
        const auto next = s.find(sep, pos);
        parts.push_back(s.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos));
        if (next == std::string_view::npos) break;
        pos = next + 1;
    }
    return parts;
}

std::string fmt_double(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace

ShapeSpec icosphere_spec(int subdivisions, double radius) {
    ShapeSpec spec;
    spec.kind = ShapeKind::icosphere;
    spec.subdivisions = subdivisions;
    spec.radius = radius;
    return spec;
}

ShapeSpec cylinder_spec(double radius, double height, int angular, int axial, bool caps) {
    ShapeSpec spec;
    spec.kind = ShapeKind::cylinder;
    spec.radius = radius;
    spec.height = height;
    spec.angular_samples = angular;
    spec.axial_samples = axial;
    spec.caps = caps;
    return spec;
}

ShapeSpec catenoid_spec(int angular, int axial) {
    ShapeSpec spec;
    spec.kind = ShapeKind::catenoid;
    spec.angular_samples = angular;
    spec.axial_samples = axial;
    return spec;
}

ShapeSpec dumbbell_spec() {
    ShapeSpec spec;
    spec.kind = ShapeKind::dumbbell;
    spec.angular_samples = 128;
    spec.axial_samples = 145;
    return spec;
}

std::string_view kind_name(ShapeKind kind) noexcept {
    switch (kind) {
        case ShapeKind::icosphere: return "icosphere";
        case ShapeKind::cylinder: return "cylinder";
        case ShapeKind::catenoid: return "catenoid";
        case ShapeKind::dumbbell: return "dumbbell";
        case ShapeKind::revolution: return "revolution";
    }
    return "icosphere";
}

ShapeSpec parse_shape_spec(std::string_view text) {
    const auto colon = text.find(':');
    const auto kind = text.substr(0, colon);
    const std::string_view params = colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);

    ShapeSpec spec;
    if (kind == "icosphere") {
        spec = icosphere_spec(3);
    } else if (kind == "cylinder") {
        spec = cylinder_spec(1.0, 4.0, 64, 32, true);
    } else if (kind == "catenoid") {
        spec = catenoid_spec();
    } else if (kind == "dumbbell") {
        spec = dumbbell_spec();
    } else if (kind == "revolution") {
        spec.kind = ShapeKind::revolution;
        spec.angular_samples = 32;
    } else {
        throw SpecError("unknown shape kind '" + std::string(kind) + "'");
    }

    if (!params.empty() && params != "default") {
        for (const auto item : split(params, ',')) {
            const auto eq = item.find('=');
            if (eq == std::string_view::npos) {
                // Bare value: the icosphere subdivision level.
                if (spec.kind != ShapeKind::icosphere) throw SpecError("expected key=value, got '" + std::string(item) + "'");
                spec.subdivisions = parse_int(item, "level");
                continue;
            }
            const auto key = item.substr(0, eq);
            const auto value = item.substr(eq + 1);
            if (key == "level") spec.subdivisions = parse_int(value, key);
            else if (key == "r") spec.radius = parse_double(value, key);
            else if (key == "h") spec.height = parse_double(value, key);
            else if (key == "nt") spec.angular_samples = parse_int(value, key);
            else if (key == "nz") spec.axial_samples = parse_int(value, key);
            else if (key == "caps") spec.caps = parse_int(value, key) != 0;
            else if (key == "zmin") spec.z_min = parse_double(value, key);
            else if (key == "zmax") spec.z_max = parse_double(value, key);
            else if (key == "bulb") spec.bulb_radius = parse_double(value, key);
            else if (key == "offset") spec.bulb_offset = parse_double(value, key);
            else if (key == "neck") spec.neck_radius = parse_double(value, key);
            else if (key == "pts") {
                spec.profile.clear();
                for (const auto pt : split(value, ';')) {
                    const auto slash = pt.find('/');
                    if (slash == std::string_view::npos) throw SpecError("profile point must be z/r, got '" + std::string(pt) + "'");
                    spec.profile.push_back({parse_double(pt.substr(0, slash), "z"), parse_double(pt.substr(slash + 1), "r")});
                }
            } else {
                throw SpecError("unknown shape parameter '" + std::string(key) + "'");
            }
        }
    }
    check_spec(spec);
    return spec;
}

std::string to_string(const ShapeSpec& spec) {
    std::string out(kind_name(spec.kind));
    out += ':';
    switch (spec.kind) {
        case ShapeKind::icosphere:
            out += "level=" + std::to_string(spec.subdivisions) + ",r=" + fmt_double(spec.radius);
            break;
        case ShapeKind::cylinder:
            out += "r=" + fmt_double(spec.radius) + ",h=" + fmt_double(spec.height) + ",nt=" +
                   std::to_string(spec.angular_samples) + ",nz=" + std::to_string(spec.axial_samples) +
                   ",caps=" + (spec.caps ? "1" : "0");
            break;
        case ShapeKind::catenoid:
            out += "zmin=" + fmt_double(spec.z_min) + ",zmax=" + fmt_double(spec.z_max) + ",nt=" +
                   std::to_string(spec.angular_samples) + ",nz=" + std::to_string(spec.axial_samples);
            break;
        case ShapeKind::dumbbell:
            out += "bulb=" + fmt_double(spec.bulb_radius) + ",offset=" + fmt_double(spec.bulb_offset) +
                   ",neck=" + fmt_double(spec.neck_radius) + ",nt=" + std::to_string(spec.angular_samples) +
                   ",nz=" + std::to_string(spec.axial_samples);
            break;
        case ShapeKind::revolution: {
            out += "pts=";
            for (std::size_t k = 0; k < spec.profile.size(); ++k) {
                if (k) out += ';';
                out += fmt_double(spec.profile[k].z) + "/" + fmt_double(spec.profile[k].r);
            }
            out += ",nt=" + std::to_string(spec.angular_samples);
            break;
        }
    }
    return out;
}

void check_spec(const ShapeSpec& spec) {
    auto require = [](bool ok, const char* what) {
        if (!ok) throw SpecError(what);
    };
    switch (spec.kind) {
        case ShapeKind::icosphere:
            require(spec.subdivisions >= 0 && spec.subdivisions <= 8, "icosphere subdivision level must be in [0, 8]");
            require(spec.radius > 0.0, "radius must be positive");
            break;
        case ShapeKind::cylinder:
            require(spec.radius > 0.0 && spec.height > 0.0, "cylinder radius and height must be positive");
            require(spec.angular_samples >= 3, "need at least 3 angular samples");
            require(spec.axial_samples >= 2, "need at least 2 axial samples");
            break;
        case ShapeKind::catenoid:
            require(spec.z_max > spec.z_min, "catenoid needs zmax > zmin");
            require(spec.angular_samples >= 3, "need at least 3 angular samples");
            require(spec.axial_samples >= 2, "need at least 2 axial samples");
            break;
        case ShapeKind::dumbbell: {
            require(spec.bulb_radius > 0.0 && spec.neck_radius > 0.0, "dumbbell radii must be positive");
            require(spec.bulb_offset > 0.5 * spec.bulb_radius, "dumbbell bulbs must not overlap the centre");
            require(spec.neck_radius < spec.bulb_radius * std::sqrt(3.0) / 2.0, "dumbbell neck too wide for the blend");
            require(spec.angular_samples >= 6, "need at least 6 angular samples");
            require(spec.axial_samples >= 3, "need at least 3 axial samples");
            // The blended profile must stay strictly positive between the poles.
            const double extent = dumbbell_extent(spec);
            for (int k = 0; k < 1000; ++k) {
                require(dumbbell_profile(spec, extent * k / 1000.0) > 0.0, "dumbbell profile pinches");
            }
            break;
        }
        case ShapeKind::revolution:
            require(spec.profile.size() >= 2, "revolution profile needs at least 2 samples");
            require(spec.angular_samples >= 3, "need at least 3 angular samples");
            for (std::size_t k = 0; k < spec.profile.size(); ++k) {
                const bool end = k == 0 || k + 1 == spec.profile.size();
                require(spec.profile[k].r > 0.0 || (end && spec.profile[k].r == 0.0),
                        "profile radius must be positive away from the poles");
                if (k > 0) require(spec.profile[k].z > spec.profile[k - 1].z, "profile z must increase");
            }
            require(spec.profile.size() > 2 || (spec.profile.front().r > 0.0 && spec.profile.back().r > 0.0),
                    "profile with poles needs an interior sample");
            break;
    }
}

double dumbbell_profile(const ShapeSpec& spec, double z) {
    const double u = std::abs(z);
    const double c = spec.bulb_offset;
    const double rb = spec.bulb_radius;
    if (u >= c + rb) return 0.0;
    // Squared radius: sphere of radius rb about +-c, joined to the neck by a
    // cubic Hermite blend on [0, a] matching value and slope at a and with
    // zero slope at the neck.
    const double a = c - 0.5 * rb;
    if (u >= a) return std::sqrt(std::max(0.0, rb * rb - (u - c) * (u - c)));
    const double fa = rb * rb - (a - c) * (a - c);
    const double dfa = -2.0 * (a - c);
    const double f0 = spec.neck_radius * spec.neck_radius;
    const double s = u / a;
    const double h00 = 2 * s * s * s - 3 * s * s + 1;
    const double h01 = -2 * s * s * s + 3 * s * s;
    const double h11 = s * s * s - s * s;
    return std::sqrt(h00 * f0 + h01 * fa + h11 * a * dfa);
}

TriMesh generate(const ShapeSpec& spec) {
    check_spec(spec);
    if (spec.kind == ShapeKind::icosphere) return icosphere(spec.subdivisions, spec.radius);
    auto mesh = build_revolution(layout_for(spec));
    validate(mesh);
    return mesh;
}

std::vector<int> mid_ring_vertices(const ShapeSpec& spec) {
    const auto layout = layout_for(spec);
    int start = 0;
    for (std::size_t k = 0; k < layout.mid_ring; ++k) start += layout.rings[k].count;
    std::vector<int> ring(static_cast<std::size_t>(layout.rings[layout.mid_ring].count));
    for (std::size_t i = 0; i < ring.size(); ++i) ring[i] = start + static_cast<int>(i);
    return ring;
}

double mid_ring_radius(const Positions& positions, const TriMesh& mesh, const ShapeSpec& spec) {
    if (spec.kind == ShapeKind::icosphere) {
        const Eigen::Vector3d c = surface_centroid(positions, mesh.faces);
        double sum = 0.0;
        for (Eigen::Index i = 0; i < positions.rows(); ++i) sum += (positions.row(i).transpose() - c).norm();
        return sum / static_cast<double>(positions.rows());
    }
    const auto ring = mid_ring_vertices(spec);
    Eigen::Vector2d centre = Eigen::Vector2d::Zero();
    for (int v : ring) centre += positions.row(v).head<2>().transpose();
    centre /= static_cast<double>(ring.size());
    double sum = 0.0;
    for (int v : ring) sum += (positions.row(v).head<2>().transpose() - centre).norm();
    return sum / static_cast<double>(ring.size());
}

double mid_ring_radius(const TriMesh& mesh, const ShapeSpec& spec) { return mid_ring_radius(mesh.vertices, mesh, spec); }

}  // namespace curvflow
