#pragma once

#include <filesystem>
#include <optional>
#include <string_view>

#include "curvflow/mesh.hpp"

namespace curvflow {

enum class MeshFormat { obj, off, ply };

enum class PlyEncoding { ascii, binary_little_endian };

struct SaveOptions {
    PlyEncoding ply_encoding = PlyEncoding::binary_little_endian;
    // Area-weighted vertex normals as nx/ny/nz (PLY) or vn lines (OBJ).
    bool write_normals = false;
};

[[nodiscard]] std::string_view format_name(MeshFormat format) noexcept;
[[nodiscard]] std::optional<MeshFormat> parse_format(std::string_view name) noexcept;
// Format from the file extension, case-insensitive.
[[nodiscard]] std::optional<MeshFormat> format_from_path(const std::filesystem::path& path);

// Loads and validates. Polygons are fan-triangulated; attributes other than
// positions and faces are dropped. Throws ParseError, TopologyError,
// EmptyMesh or IoError.
[[nodiscard]] TriMesh load_mesh(const std::filesystem::path& path, MeshFormat format);
[[nodiscard]] TriMesh load_mesh(const std::filesystem::path& path);

// ASCII formats write 17 significant digits; binary PLY writes doubles.
void save_mesh(const TriMesh& mesh, const std::filesystem::path& path, MeshFormat format, const SaveOptions& options = {});
void save_mesh(const TriMesh& mesh, const std::filesystem::path& path);

[[nodiscard]] Positions vertex_normals(const TriMesh& mesh);

}  // namespace curvflow
