#include "curvflow/mesh_io.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "curvflow/errors.hpp"

namespace curvflow {
namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

std::ifstream open_input(const std::filesystem::path& path, bool binary) {
    std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    return in;
}

std::ofstream open_output(const std::filesystem::path& path, bool binary) {
    std::ofstream out(path, binary ? std::ios::binary | std::ios::trunc : std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    return out;
}

void finish_output(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out) throw IoError("write to '" + path.string() + "' failed");
}

// Fan triangulation of a polygon given as vertex indices.
void append_fan(std::vector<Face>& faces, const std::vector<int>& polygon, const std::string& where) {
    if (polygon.size() < 3) throw ParseError(where + ": face with fewer than 3 vertices");
    for (std::size_t k = 1; k + 1 < polygon.size(); ++k) faces.push_back({polygon[0], polygon[k], polygon[k + 1]});
}

TriMesh build_mesh(std::vector<Eigen::Vector3d> verts, std::vector<Face> faces) {
    TriMesh mesh;
    mesh.vertices.resize(static_cast<Eigen::Index>(verts.size()), 3);
    for (std::size_t i = 0; i < verts.size(); ++i) mesh.vertices.row(static_cast<Eigen::Index>(i)) = verts[i].transpose();
    mesh.faces = std::move(faces);
    validate(mesh);
    return mesh;
}

// ---------------------------------------------------------------------------
// OBJ
// ---------------------------------------------------------------------------

TriMesh load_obj(const std::filesystem::path& path) {
    auto in = open_input(path, false);
    std::vector<Eigen::Vector3d> verts;
    std::vector<Face> faces;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string where = path.string() + ":" + std::to_string(line_no);
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag) || tag[0] == '#') continue;
        if (tag == "v") {
            Eigen::Vector3d p;
            if (!(ls >> p.x() >> p.y() >> p.z())) throw ParseError(where + ": malformed vertex");
            verts.push_back(p);
        } else if (tag == "f") {
            std::vector<int> polygon;
            std::string tok;
            while (ls >> tok) {
                const auto slash = tok.find('/');
                const std::string head = tok.substr(0, slash);
                int idx = 0;
                try {
                    std::size_t used = 0;
                    idx = std::stoi(head, &used);
                    if (used != head.size()) throw std::invalid_argument(head);
                } catch (const std::exception&) {
                    throw ParseError(where + ": malformed face index '" + tok + "'");
                }
                if (idx == 0) throw ParseError(where + ": OBJ indices are 1-based");
                polygon.push_back(idx > 0 ? idx - 1 : static_cast<int>(verts.size()) + idx);
            }
            append_fan(faces, polygon, where);
        }
    }
    return build_mesh(std::move(verts), std::move(faces));
}

void save_obj(const TriMesh& mesh, const std::filesystem::path& path, const SaveOptions& options) {
    auto out = open_output(path, false);
    out << std::setprecision(17);
    for (Eigen::Index i = 0; i < mesh.vertices.rows(); ++i) {
        out << "v " << mesh.vertices(i, 0) << ' ' << mesh.vertices(i, 1) << ' ' << mesh.vertices(i, 2) << '\n';
    }
    if (options.write_normals) {
        const auto normals = vertex_normals(mesh);
        for (Eigen::Index i = 0; i < normals.rows(); ++i) {
            out << "vn " << normals(i, 0) << ' ' << normals(i, 1) << ' ' << normals(i, 2) << '\n';
        }
        for (const auto& f : mesh.faces) {
            out << "f " << f[0] + 1 << "//" << f[0] + 1 << ' ' << f[1] + 1 << "//" << f[1] + 1 << ' ' << f[2] + 1
                << "//" << f[2] + 1 << '\n';
        }
    } else {
        for (const auto& f : mesh.faces) out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
    }
    finish_output(out, path);
}

// ---------------------------------------------------------------------------
// OFF
// ---------------------------------------------------------------------------

// Whitespace tokenizer that skips '#' comments.
class TokenStream {
public:
    explicit TokenStream(std::istream& in) : in_(in) {}

    bool next(std::string& tok) {
        while (!(line_ >> tok)) {
            std::string raw;
            if (!std::getline(in_, raw)) return false;
            if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
            line_.clear();
            line_.str(raw);
        }
        return true;
    }

    template <typename T>
    T read(const std::string& what) {
        std::string tok;
        if (!next(tok)) throw ParseError("unexpected end of file reading " + what);
        std::istringstream ts(tok);
        T value{};
        if (!(ts >> value) || !ts.eof()) throw ParseError("malformed " + what + " '" + tok + "'");
        return value;
    }

    // Discards what is left of the current line (e.g. per-face colours).
    void skip_line() {
        line_.clear();
        line_.str("");
    }

private:
    std::istream& in_;
    std::istringstream line_;
};

TriMesh load_off(const std::filesystem::path& path) {
    auto in = open_input(path, false);
    TokenStream ts(in);
    std::string header;
    if (!ts.next(header) || header != "OFF") throw ParseError(path.string() + ": missing OFF header");
    const auto nv = ts.read<long long>("vertex count");
    const auto nf = ts.read<long long>("face count");
    (void)ts.read<long long>("edge count");
    if (nv < 0 || nf < 0) throw ParseError(path.string() + ": negative element count");
    std::vector<Eigen::Vector3d> verts(static_cast<std::size_t>(nv));
    for (auto& p : verts) {
        p.x() = ts.read<double>("vertex coordinate");
        p.y() = ts.read<double>("vertex coordinate");
        p.z() = ts.read<double>("vertex coordinate");
        ts.skip_line();
    }
    std::vector<Face> faces;
    for (long long f = 0; f < nf; ++f) {
        const auto k = ts.read<int>("face size");
        std::vector<int> polygon(static_cast<std::size_t>(std::max(k, 0)));
        for (auto& idx : polygon) idx = ts.read<int>("face index");
        ts.skip_line();
        append_fan(faces, polygon, path.string() + ": face " + std::to_string(f));
    }
    return build_mesh(std::move(verts), std::move(faces));
}

void save_off(const TriMesh& mesh, const std::filesystem::path& path) {
    auto out = open_output(path, false);
    out << "OFF\n" << mesh.num_vertices() << ' ' << mesh.num_faces() << " 0\n" << std::setprecision(17);
    for (Eigen::Index i = 0; i < mesh.vertices.rows(); ++i) {
        out << mesh.vertices(i, 0) << ' ' << mesh.vertices(i, 1) << ' ' << mesh.vertices(i, 2) << '\n';
    }
    for (const auto& f : mesh.faces) out << "3 " << f[0] << ' ' << f[1] << ' ' << f[2] << '\n';
    finish_output(out, path);
}

// ---------------------------------------------------------------------------
// PLY
// ---------------------------------------------------------------------------

enum class PlyType { i8, u8, i16, u16, i32, u32, f32, f64 };

PlyType parse_ply_type(const std::string& name) {
    if (name == "char" || name == "int8") return PlyType::i8;
    if (name == "uchar" || name == "uint8") return PlyType::u8;
    if (name == "short" || name == "int16") return PlyType::i16;
    if (name == "ushort" || name == "uint16") return PlyType::u16;
    if (name == "int" || name == "int32") return PlyType::i32;
    if (name == "uint" || name == "uint32") return PlyType::u32;
    if (name == "float" || name == "float32") return PlyType::f32;
    if (name == "double" || name == "float64") return PlyType::f64;
    throw ParseError("unknown PLY type '" + name + "'");
}

struct PlyProperty {
    std::string name;
    PlyType type = PlyType::f32;
    bool is_list = false;
    PlyType count_type = PlyType::u8;
};

struct PlyElement {
    std::string name;
    std::size_t count = 0;
    std::vector<PlyProperty> properties;
};

template <typename T>
T read_le(std::istream& in) {
    static_assert(std::endian::native == std::endian::little, "binary PLY reader assumes a little-endian host");
    T value{};
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!in) throw ParseError("unexpected end of binary PLY data");
    return value;
}

double read_binary_scalar(std::istream& in, PlyType type) {
    switch (type) {
        case PlyType::i8: return read_le<std::int8_t>(in);
        case PlyType::u8: return read_le<std::uint8_t>(in);
        case PlyType::i16: return read_le<std::int16_t>(in);
        case PlyType::u16: return read_le<std::uint16_t>(in);
        case PlyType::i32: return read_le<std::int32_t>(in);
        case PlyType::u32: return read_le<std::uint32_t>(in);
        case PlyType::f32: return read_le<float>(in);
        case PlyType::f64: return read_le<double>(in);
    }
    return 0.0;
}

TriMesh load_ply(const std::filesystem::path& path) {
    auto in = open_input(path, true);
    std::string line;
    if (!std::getline(in, line) || line.substr(0, 3) != "ply") throw ParseError(path.string() + ": missing ply magic");

    bool binary = false;
    std::vector<PlyElement> elements;
    bool header_done = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key == "format") {
            std::string enc;
            ls >> enc;
            if (enc == "ascii") {
                binary = false;
            } else if (enc == "binary_little_endian") {
                binary = true;
            } else {
                throw ParseError(path.string() + ": unsupported PLY encoding '" + enc + "'");
            }
        } else if (key == "element") {
            PlyElement e;
            long long count = -1;
            ls >> e.name >> count;
            if (count < 0) throw ParseError(path.string() + ": bad element line '" + line + "'");
            e.count = static_cast<std::size_t>(count);
            elements.push_back(std::move(e));
        } else if (key == "property") {
            if (elements.empty()) throw ParseError(path.string() + ": property before element");
            PlyProperty p;
            std::string type;
            ls >> type;
            if (type == "list") {
                std::string count_type, item_type;
                ls >> count_type >> item_type;
                p.is_list = true;
                p.count_type = parse_ply_type(count_type);
                p.type = parse_ply_type(item_type);
            } else {
                p.type = parse_ply_type(type);
            }
            ls >> p.name;
            elements.back().properties.push_back(p);
        } else if (key == "end_header") {
            header_done = true;
            break;
        }
    }
    if (!header_done) throw ParseError(path.string() + ": PLY header not terminated");

    std::vector<Eigen::Vector3d> verts;
    std::vector<Face> faces;
    TokenStream ascii(in);
    auto scalar = [&](PlyType type) {
        return binary ? read_binary_scalar(in, type) : ascii.read<double>("PLY value");
    };

    for (const auto& e : elements) {
        const bool is_vertex = e.name == "vertex";
        const bool is_face = e.name == "face";
        int ix = -1, iy = -1, iz = -1, iface = -1;
        for (std::size_t k = 0; k < e.properties.size(); ++k) {
            const auto& nm = e.properties[k].name;
            if (nm == "x") ix = static_cast<int>(k);
            if (nm == "y") iy = static_cast<int>(k);
            if (nm == "z") iz = static_cast<int>(k);
            if (e.properties[k].is_list && (nm == "vertex_indices" || nm == "vertex_index")) iface = static_cast<int>(k);
        }
        if (is_vertex && (ix < 0 || iy < 0 || iz < 0)) throw ParseError(path.string() + ": vertex element lacks x/y/z");
        if (is_face && iface < 0) throw ParseError(path.string() + ": face element lacks vertex_indices");

        for (std::size_t r = 0; r < e.count; ++r) {
            Eigen::Vector3d p = Eigen::Vector3d::Zero();
            std::vector<int> polygon;
            for (std::size_t k = 0; k < e.properties.size(); ++k) {
                const auto& prop = e.properties[k];
                if (prop.is_list) {
                    const auto count = scalar(prop.count_type);
                    if (count < 0) throw ParseError(path.string() + ": negative list length");
                    std::vector<int> items(static_cast<std::size_t>(count));
                    for (auto& item : items) item = static_cast<int>(scalar(prop.type));
                    if (static_cast<int>(k) == iface) polygon = std::move(items);
                } else {
                    const double v = scalar(prop.type);
                    if (static_cast<int>(k) == ix) p.x() = v;
                    if (static_cast<int>(k) == iy) p.y() = v;
                    if (static_cast<int>(k) == iz) p.z() = v;
                }
            }
            if (is_vertex) verts.push_back(p);
            if (is_face) append_fan(faces, polygon, path.string() + ": face " + std::to_string(r));
        }
    }
    return build_mesh(std::move(verts), std::move(faces));
}

template <typename T>
void write_le(std::ostream& out, T value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

void save_ply(const TriMesh& mesh, const std::filesystem::path& path, const SaveOptions& options) {
    const bool binary = options.ply_encoding == PlyEncoding::binary_little_endian;
    auto out = open_output(path, true);
    Positions normals;
    if (options.write_normals) normals = vertex_normals(mesh);

    out << "ply\nformat " << (binary ? "binary_little_endian" : "ascii") << " 1.0\n";
    out << "element vertex " << mesh.num_vertices() << "\n";
    out << "property double x\nproperty double y\nproperty double z\n";
    if (options.write_normals) out << "property double nx\nproperty double ny\nproperty double nz\n";
    out << "element face " << mesh.num_faces() << "\n";
    out << "property list uchar int vertex_indices\nend_header\n";

    const Eigen::Index cols = options.write_normals ? 6 : 3;
    auto value = [&](Eigen::Index i, Eigen::Index c) { return c < 3 ? mesh.vertices(i, c) : normals(i, c - 3); };
    if (binary) {
        for (Eigen::Index i = 0; i < mesh.vertices.rows(); ++i) {
            for (Eigen::Index c = 0; c < cols; ++c) write_le<double>(out, value(i, c));
        }
        for (const auto& f : mesh.faces) {
            write_le<std::uint8_t>(out, 3);
            for (int v : f) write_le<std::int32_t>(out, v);
        }
    } else {
        out << std::setprecision(17);
        for (Eigen::Index i = 0; i < mesh.vertices.rows(); ++i) {
            for (Eigen::Index c = 0; c < cols; ++c) out << (c ? " " : "") << value(i, c);
            out << '\n';
        }
        for (const auto& f : mesh.faces) out << "3 " << f[0] << ' ' << f[1] << ' ' << f[2] << '\n';
    }
    finish_output(out, path);
}

}  // namespace

std::string_view format_name(MeshFormat format) noexcept {
    switch (format) {
        case MeshFormat::obj: return "obj";
        case MeshFormat::off: return "off";
        case MeshFormat::ply: return "ply";
    }
    return "obj";
}

std::optional<MeshFormat> parse_format(std::string_view name) noexcept {
    const auto n = lower(name);
    if (n == "obj") return MeshFormat::obj;
    if (n == "off") return MeshFormat::off;
    if (n == "ply") return MeshFormat::ply;
    return std::nullopt;
}

std::optional<MeshFormat> format_from_path(const std::filesystem::path& path) {
    auto ext = path.extension().string();
    if (!ext.empty() && ext[0] == '.') ext.erase(0, 1);
    return parse_format(ext);
}

TriMesh load_mesh(const std::filesystem::path& path, MeshFormat format) {
    switch (format) {
        case MeshFormat::obj: return load_obj(path);
        case MeshFormat::off: return load_off(path);
        case MeshFormat::ply: return load_ply(path);
    }
    throw ParseError("unknown mesh format");
}

TriMesh load_mesh(const std::filesystem::path& path) {
    const auto format = format_from_path(path);
    if (!format) throw ParseError("cannot infer mesh format from '" + path.string() + "'");
    return load_mesh(path, *format);
}

void save_mesh(const TriMesh& mesh, const std::filesystem::path& path, MeshFormat format, const SaveOptions& options) {
    switch (format) {
        case MeshFormat::obj: save_obj(mesh, path, options); return;
        case MeshFormat::off: save_off(mesh, path); return;
        case MeshFormat::ply: save_ply(mesh, path, options); return;
    }
}

void save_mesh(const TriMesh& mesh, const std::filesystem::path& path) {
    const auto format = format_from_path(path);
    if (!format) throw IoError("cannot infer mesh format from '" + path.string() + "'");
    save_mesh(mesh, path, *format);
}

Positions vertex_normals(const TriMesh& mesh) {
    Positions normals = Positions::Zero(mesh.vertices.rows(), 3);
    for (const auto& f : mesh.faces) {
        const Eigen::Vector3d a = mesh.vertices.row(f[0]).transpose();
        const Eigen::Vector3d n = (mesh.vertices.row(f[1]).transpose() - a).cross(mesh.vertices.row(f[2]).transpose() - a);
        for (int v : f) normals.row(v) += n.transpose();
    }
    for (Eigen::Index i = 0; i < normals.rows(); ++i) {
        const double len = normals.row(i).norm();
        if (len > 0.0) normals.row(i) /= len;
    }
    return normals;
}

}  // namespace curvflow
