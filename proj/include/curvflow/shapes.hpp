#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "curvflow/mesh.hpp"

namespace curvflow {

enum class ShapeKind { icosphere, cylinder, catenoid, dumbbell, revolution };

// One sample (z, r) of a profile curve rotated about the z axis.
struct ProfileSample {
    double z = 0.0;
    double r = 0.0;
};

// Parameters for the synthetic test surfaces. Only the fields relevant to
// `kind` are read; the defaults are the ones used by the test suites.
//
// Rotational shapes are built ring by ring from the bottom of the axis to the
// top. `angular_samples` is the vertex count of a full-radius ring and
// `axial_samples` the number of rings along the axis (wall rings for the
// cylinder, interior rings for the dumbbell).
struct ShapeSpec {
    ShapeKind kind = ShapeKind::icosphere;

    int subdivisions = 3;  // icosphere
    double radius = 1.0;   // icosphere, cylinder
    double height = 4.0;   // cylinder
    bool caps = true;      // cylinder

    double z_min = -1.0;  // catenoid, r(z) = cosh(z)
    double z_max = 1.0;

    double bulb_radius = 1.0;  // dumbbell
    double bulb_offset = 1.5;
    double neck_radius = 0.2;

    std::vector<ProfileSample> profile;  // revolution, bottom to top

    int angular_samples = 64;
    int axial_samples = 32;
};

[[nodiscard]] ShapeSpec icosphere_spec(int subdivisions, double radius = 1.0);
[[nodiscard]] ShapeSpec cylinder_spec(double radius, double height, int angular, int axial, bool caps);
[[nodiscard]] ShapeSpec catenoid_spec(int angular = 64, int axial = 33);
[[nodiscard]] ShapeSpec dumbbell_spec();

// Inline generator strings such as `icosphere:3`, `icosphere:level=4,r=2`,
// `cylinder:r=1,h=6,nt=64,nz=48,caps=1`, `catenoid:nt=64,nz=33`,
// `dumbbell:default`, `dumbbell:nt=96,nz=121,neck=0.2` and
// `revolution:pts=-1/0;0/1;1/0,nt=32`. Throws SpecError.
[[nodiscard]] ShapeSpec parse_shape_spec(std::string_view text);
[[nodiscard]] std::string to_string(const ShapeSpec& spec);
[[nodiscard]] std::string_view kind_name(ShapeKind kind) noexcept;

// Throws SpecError for out-of-range parameters.
void check_spec(const ShapeSpec& spec);

// Deterministic: the same spec yields the same mesh bit for bit. Boundary
// rings of open shapes carry kTagBoundary.
[[nodiscard]] TriMesh generate(const ShapeSpec& spec);

// Radius of the dumbbell profile at height z (0 outside the poles).
[[nodiscard]] double dumbbell_profile(const ShapeSpec& spec, double z);

// Vertex indices of the ring nearest the axial midpoint of a rotational
// shape. Throws SpecError for the icosphere.
[[nodiscard]] std::vector<int> mid_ring_vertices(const ShapeSpec& spec);

// Rotational shapes: mean distance of the mid ring from the axis (a line
// parallel to z through the ring's centroid). Icosphere: mean vertex distance
// from the surface centroid.
[[nodiscard]] double mid_ring_radius(const Positions& positions, const TriMesh& mesh, const ShapeSpec& spec);
[[nodiscard]] double mid_ring_radius(const TriMesh& mesh, const ShapeSpec& spec);

}  // namespace curvflow
