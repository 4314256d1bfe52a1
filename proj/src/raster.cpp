#include "instrecon/raster.hpp"

#include <algorithm>
#include <cmath>

#include "instrecon/raw_io.hpp"

namespace instrecon {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNearPlane = 1e-6;

}  // namespace

FaceBuffer rasterize(const Camera& cam, const TriMesh& mesh)
{
    FaceBuffer buf{DepthMap(cam.width, cam.height, kInf), PixelMap<std::uint32_t>(cam.width, cam.height, kNoFace)};
    PixelMap<double> zbuf(cam.width, cam.height, kInf);
    const Mat3 K_inv = cam.K.inverse();

    // Length of K^-1 (x, y, 1) per pixel converts camera z into ray distance.
    PixelMap<double> ray_scale(cam.width, cam.height, 0.0);
    for (int y = 0; y < cam.height; ++y) {
        for (int x = 0; x < cam.width; ++x) {
            ray_scale.at(x, y) = (K_inv * Vec3(x, y, 1.0)).norm();
        }
    }

    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
        const Face& face = mesh.faces[f];
        Vec3 pc[3];
        Vec2 ps[3];
        bool clipped = false;
        for (int k = 0; k < 3; ++k) {
            pc[k] = cam.to_camera(mesh.vertices[face[k]]);
            if (pc[k].z() <= kNearPlane) {
                clipped = true;
                break;
            }
            const Vec3 h = cam.K * pc[k];
            ps[k] = Vec2(h.x() / h.z(), h.y() / h.z());
        }
        if (clipped) {
            continue;
        }
        const double area = (ps[1] - ps[0]).x() * (ps[2] - ps[0]).y() - (ps[1] - ps[0]).y() * (ps[2] - ps[0]).x();
        if (std::abs(area) < 1e-18) {
            continue;
        }
        const int x0 = std::max(0, static_cast<int>(std::ceil(std::min({ps[0].x(), ps[1].x(), ps[2].x()}))));
        const int x1 = std::min(cam.width - 1, static_cast<int>(std::floor(std::max({ps[0].x(), ps[1].x(), ps[2].x()}))));
        const int y0 = std::max(0, static_cast<int>(std::ceil(std::min({ps[0].y(), ps[1].y(), ps[2].y()}))));
        const int y1 = std::min(cam.height - 1, static_cast<int>(std::floor(std::max({ps[0].y(), ps[1].y(), ps[2].y()}))));
        const double inv_area = 1.0 / area;
        const double inv_z[3] = {1.0 / pc[0].z(), 1.0 / pc[1].z(), 1.0 / pc[2].z()};
        for (int y = y0; y <= y1; ++y) {
            for (int x = x0; x <= x1; ++x) {
                const Vec2 p(x, y);
                // Screen-space barycentrics from signed sub-triangle areas.
                auto edge = [&](const Vec2& a, const Vec2& b) {
                    return (b - a).x() * (p - a).y() - (b - a).y() * (p - a).x();
                };
                const double w0 = edge(ps[1], ps[2]) * inv_area;
                const double w1 = edge(ps[2], ps[0]) * inv_area;
                const double w2 = edge(ps[0], ps[1]) * inv_area;
                if (w0 < 0.0 || w1 < 0.0 || w2 < 0.0) {
                    continue;
                }
                // 1/z is affine in screen space.
                const double z = 1.0 / (w0 * inv_z[0] + w1 * inv_z[1] + w2 * inv_z[2]);
                if (z < zbuf.at(x, y)) {
                    zbuf.at(x, y) = z;
                    buf.depth.at(x, y) = z * ray_scale.at(x, y);
                    buf.face.at(x, y) = static_cast<std::uint32_t>(f);
                }
            }
        }
    }
    return buf;
}

DepthMap render_depth(const Camera& cam, const TriMesh& mesh) { return rasterize(cam, mesh).depth; }

LabelMap render_labels(const Camera& cam, const TriMesh& mesh)
{
    if (!mesh.has_labels()) {
        throw Error(ErrorCode::MissingLabels, "camera-mv", "render_labels needs per-vertex labels");
    }
    const FaceBuffer buf = rasterize(cam, mesh);
    LabelMap labels(cam.width, cam.height, kBackground);
    std::vector<std::int32_t> per_face(mesh.faces.size());
    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
        per_face[f] = face_label(mesh, f);
    }
    for (std::size_t i = 0; i < labels.data.size(); ++i) {
        if (buf.face.data[i] != kNoFace) {
            labels.data[i] = per_face[buf.face.data[i]];
        }
    }
    return labels;
}

Image render_intensity(const Camera& cam, const TriMesh& mesh)
{
    const FaceBuffer buf = rasterize(cam, mesh);
    Image img(cam.width, cam.height, 0.0f);
    const Vec3 eye = cam.center();
    for (int y = 0; y < cam.height; ++y) {
        for (int x = 0; x < cam.width; ++x) {
            const std::uint32_t f = buf.face.at(x, y);
            if (f == kNoFace) {
                continue;
            }
            double albedo = 0.7;
            if (mesh.has_labels()) {
                albedo = face_label(mesh, f) == kHumanLabel ? 0.9 : 0.45;
            }
            const Face& face = mesh.faces[f];
            const Vec3 n = mesh.face_normal(f).normalized();
            const Vec3 centroid = (mesh.vertices[face[0]] + mesh.vertices[face[1]] + mesh.vertices[face[2]]) / 3.0;
            const double lambert = std::abs(n.dot((eye - centroid).normalized()));
            img.at(x, y) = static_cast<float>(albedo * (0.35 + 0.65 * lambert));
        }
    }
    return img;
}

namespace {

template <class T>
void write_map(const std::filesystem::path& path, const PixelMap<T>& map, const char* dtype)
{
    raw::write_array(path, map.data);
    raw::write_json(raw::with_suffix(path, ".json"),
                    {{"format", "instrecon-map"}, {"version", 1}, {"dtype", dtype}, {"width", map.width},
                     {"height", map.height}, {"layout", "row-major"}, {"endianness", "little"}});
}

template <class T>
PixelMap<T> read_map(const std::filesystem::path& path, const char* dtype)
{
    const auto header = raw::read_json(raw::with_suffix(path, ".json"));
    if (header.at("dtype").get<std::string>() != dtype) {
        throw Error(ErrorCode::ShapeMismatch, "camera-mv", path.string() + ": unexpected dtype");
    }
    PixelMap<T> map;
    map.width = header.at("width").get<int>();
    map.height = header.at("height").get<int>();
    map.data = raw::read_array<T>(path, static_cast<std::size_t>(map.width) * map.height);
    return map;
}

}  // namespace

void write_depth_map(const std::filesystem::path& path, const DepthMap& depth)
{
    PixelMap<float> f32(depth.width, depth.height, 0.0f);
    for (std::size_t i = 0; i < depth.data.size(); ++i) {
        f32.data[i] = static_cast<float>(depth.data[i]);
    }
    write_map(path, f32, "float32");
}

DepthMap read_depth_map(const std::filesystem::path& path)
{
    const auto f32 = read_map<float>(path, "float32");
    DepthMap depth(f32.width, f32.height, 0.0);
    for (std::size_t i = 0; i < depth.data.size(); ++i) {
        depth.data[i] = f32.data[i];
    }
    return depth;
}

void write_label_map(const std::filesystem::path& path, const LabelMap& labels) { write_map(path, labels, "int32"); }

LabelMap read_label_map(const std::filesystem::path& path) { return read_map<std::int32_t>(path, "int32"); }

}  // namespace instrecon
