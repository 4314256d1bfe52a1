#include "instrecon/mesh_io.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

namespace instrecon {
namespace {

static_assert(std::endian::native == std::endian::little, "binary I/O assumes a little-endian host");

[[noreturn]] void io_error(const std::filesystem::path& path, const std::string& what)
{
    throw Error(ErrorCode::Io, "mesh-core", path.string() + ": " + what);
}

LoadedMesh finish(TriMesh mesh, std::vector<float> conf, const std::filesystem::path& path)
{
    try {
        mesh.validate();
    } catch (const Error& e) {
        io_error(path, e.what());
    }
    LoadedMesh out;
    out.dropped_degenerate = drop_degenerate_faces(mesh);
    out.mesh = std::move(mesh);
    out.label_conf = std::move(conf);
    return out;
}

enum class PlyType { Int8, UInt8, Int16, UInt16, Int32, UInt32, Float32, Float64 };

PlyType parse_type(const std::string& name, const std::filesystem::path& path)
{
    if (name == "char" || name == "int8") return PlyType::Int8;
    if (name == "uchar" || name == "uint8") return PlyType::UInt8;
    if (name == "short" || name == "int16") return PlyType::Int16;
    if (name == "ushort" || name == "uint16") return PlyType::UInt16;
    if (name == "int" || name == "int32") return PlyType::Int32;
    if (name == "uint" || name == "uint32") return PlyType::UInt32;
    if (name == "float" || name == "float32") return PlyType::Float32;
    if (name == "double" || name == "float64") return PlyType::Float64;
    io_error(path, "unknown PLY type '" + name + "'");
}

std::size_t type_size(PlyType t)
{
    switch (t) {
    case PlyType::Int8:
    case PlyType::UInt8: return 1;
    case PlyType::Int16:
    case PlyType::UInt16: return 2;
    case PlyType::Int32:
    case PlyType::UInt32:
    case PlyType::Float32: return 4;
    case PlyType::Float64: return 8;
    }
    return 0;
}

template <class T>
T load(const char* p)
{
    T v;
    std::memcpy(&v, p, sizeof(T));
    return v;
}

double decode(PlyType t, const char* p)
{
    switch (t) {
    case PlyType::Int8: return load<std::int8_t>(p);
    case PlyType::UInt8: return load<std::uint8_t>(p);
    case PlyType::Int16: return load<std::int16_t>(p);
    case PlyType::UInt16: return load<std::uint16_t>(p);
    case PlyType::Int32: return load<std::int32_t>(p);
    case PlyType::UInt32: return load<std::uint32_t>(p);
    case PlyType::Float32: return load<float>(p);
    case PlyType::Float64: return load<double>(p);
    }
    return 0.0;
}

struct PlyProperty {
    std::string name;
    PlyType type = PlyType::Float32;
    bool is_list = false;
    PlyType count_type = PlyType::UInt8;
};

struct PlyElement {
    std::string name;
    std::size_t count = 0;
    std::vector<PlyProperty> properties;
};

// Reads one scalar either from the binary cursor or the ASCII token stream.
class PlyReader {
public:
    PlyReader(std::istream& in, bool binary, const std::filesystem::path& path) : in_(in), binary_(binary), path_(path) {}

    double read(PlyType t)
    {
        if (binary_) {
            char buf[8];
            const auto n = type_size(t);
            if (!in_.read(buf, static_cast<std::streamsize>(n))) {
                io_error(path_, "truncated binary PLY body");
            }
            return decode(t, buf);
        }
        double v = 0.0;
        if (!(in_ >> v)) {
            io_error(path_, "truncated ASCII PLY body");
        }
        return v;
    }

private:
    std::istream& in_;
    bool binary_;
    const std::filesystem::path& path_;
};

}  // namespace

LoadedMesh read_obj(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        io_error(path, "cannot open");
    }
    TriMesh mesh;
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream ss(line);
        std::string tag;
        ss >> tag;
        if (tag == "v") {
            Vec3 v;
            ss >> v.x() >> v.y() >> v.z();
            if (!ss) {
                io_error(path, "malformed vertex record");
            }
            mesh.vertices.push_back(v);
        } else if (tag == "f") {
            std::vector<std::uint32_t> poly;
            std::string token;
            while (ss >> token) {
                const long idx = std::stol(token.substr(0, token.find('/')));
                const long resolved = idx < 0 ? static_cast<long>(mesh.vertices.size()) + idx : idx - 1;
                if (resolved < 0) {
                    io_error(path, "face index out of range");
                }
                poly.push_back(static_cast<std::uint32_t>(resolved));
            }
            for (std::size_t k = 1; k + 1 < poly.size(); ++k) {
                mesh.faces.push_back({poly[0], poly[k], poly[k + 1]});
            }
        }
    }
    return finish(std::move(mesh), {}, path);
}

void write_obj(const std::filesystem::path& path, const TriMesh& mesh)
{
    std::ofstream out(path);
    if (!out) {
        io_error(path, "cannot open for writing");
    }
    out.precision(17);
    for (const Vec3& v : mesh.vertices) {
        out << "v " << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
    }
    for (const Face& f : mesh.faces) {
        out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
    }
    if (!out) {
        io_error(path, "write failed");
    }
}

LoadedMesh read_ply(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        io_error(path, "cannot open");
    }
    std::string line;
    std::getline(in, line);
    if (line.rfind("ply", 0) != 0) {
        io_error(path, "missing 'ply' magic");
    }
    bool binary = false;
    std::vector<PlyElement> elements;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        std::istringstream ss(line);
        std::string tag;
        ss >> tag;
        if (tag == "format") {
            std::string fmt;
            ss >> fmt;
            if (fmt == "binary_little_endian") {
                binary = true;
            } else if (fmt != "ascii") {
                io_error(path, "unsupported PLY format '" + fmt + "'");
            }
        } else if (tag == "element") {
            PlyElement e;
            ss >> e.name >> e.count;
            elements.push_back(e);
        } else if (tag == "property") {
            if (elements.empty()) {
                io_error(path, "property before element");
            }
            PlyProperty p;
            std::string type;
            ss >> type;
            if (type == "list") {
                std::string count_type, item_type;
                ss >> count_type >> item_type >> p.name;
                p.is_list = true;
                p.count_type = parse_type(count_type, path);
                p.type = parse_type(item_type, path);
            } else {
                p.type = parse_type(type, path);
                ss >> p.name;
            }
            elements.back().properties.push_back(p);
        } else if (tag == "end_header") {
            break;
        }
    }

    TriMesh mesh;
    std::vector<float> conf;
    PlyReader reader(in, binary, path);
    for (const PlyElement& e : elements) {
        const bool is_vertex = e.name == "vertex";
        const bool is_face = e.name == "face";
        bool has_label = false;
        bool has_conf = false;
        for (const PlyProperty& p : e.properties) {
            has_label |= p.name == "instance_id";
            has_conf |= p.name == "label_conf";
        }
        if (is_vertex) {
            mesh.vertices.resize(e.count, Vec3::Zero());
            if (has_label) {
                mesh.vertex_labels.resize(e.count, kUnlabeled);
            }
            if (has_conf) {
                conf.resize(e.count, 0.0f);
            }
        }
        for (std::size_t i = 0; i < e.count; ++i) {
            for (const PlyProperty& p : e.properties) {
                if (p.is_list) {
                    const auto n = static_cast<std::size_t>(reader.read(p.count_type));
                    std::vector<std::uint32_t> poly(n);
                    for (std::size_t k = 0; k < n; ++k) {
                        poly[k] = static_cast<std::uint32_t>(reader.read(p.type));
                    }
                    if (is_face && (p.name == "vertex_indices" || p.name == "vertex_index")) {
                        for (std::size_t k = 1; k + 1 < n; ++k) {
                            mesh.faces.push_back({poly[0], poly[k], poly[k + 1]});
                        }
                    }
                    continue;
                }
                const double v = reader.read(p.type);
                if (!is_vertex) {
                    continue;
                }
                if (p.name == "x") {
                    mesh.vertices[i].x() = v;
                } else if (p.name == "y") {
                    mesh.vertices[i].y() = v;
                } else if (p.name == "z") {
                    mesh.vertices[i].z() = v;
                } else if (p.name == "instance_id") {
                    mesh.vertex_labels[i] = static_cast<std::int32_t>(v);
                } else if (p.name == "label_conf") {
                    conf[i] = static_cast<float>(v);
                }
            }
        }
    }
    return finish(std::move(mesh), std::move(conf), path);
}

void write_ply(const std::filesystem::path& path, const TriMesh& mesh, const std::vector<float>* label_conf)
{
    mesh.validate();
    const bool with_conf = label_conf != nullptr && label_conf->size() == mesh.vertices.size();
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        io_error(path, "cannot open for writing");
    }
    out << "ply\nformat binary_little_endian 1.0\n";
    out << "element vertex " << mesh.vertices.size() << "\n";
    out << "property double x\nproperty double y\nproperty double z\n";
    if (mesh.has_labels()) {
        out << "property int instance_id\n";
    }
    if (with_conf) {
        out << "property float label_conf\n";
    }
    out << "element face " << mesh.faces.size() << "\n";
    out << "property list uchar int vertex_indices\nend_header\n";
    for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
        const Vec3& v = mesh.vertices[i];
        const double xyz[3] = {v.x(), v.y(), v.z()};
        out.write(reinterpret_cast<const char*>(xyz), sizeof(xyz));
        if (mesh.has_labels()) {
            const std::int32_t label = mesh.vertex_labels[i];
            out.write(reinterpret_cast<const char*>(&label), sizeof(label));
        }
        if (with_conf) {
            const float c = (*label_conf)[i];
            out.write(reinterpret_cast<const char*>(&c), sizeof(c));
        }
    }
    for (const Face& f : mesh.faces) {
        const std::uint8_t n = 3;
        out.write(reinterpret_cast<const char*>(&n), 1);
        const std::int32_t idx[3] = {static_cast<std::int32_t>(f[0]), static_cast<std::int32_t>(f[1]),
                                     static_cast<std::int32_t>(f[2])};
        out.write(reinterpret_cast<const char*>(idx), sizeof(idx));
    }
    if (!out) {
        io_error(path, "write failed");
    }
}

LoadedMesh read_mesh(const std::filesystem::path& path)
{
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".obj") {
        return read_obj(path);
    }
    if (ext == ".ply") {
        return read_ply(path);
    }
    throw Error(ErrorCode::Io, "mesh-core", path.string() + ": unsupported mesh extension");
}

void write_mesh(const std::filesystem::path& path, const TriMesh& mesh)
{
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".obj") {
        write_obj(path, mesh);
    } else {
        write_ply(path, mesh);
    }
}

}  // namespace instrecon
