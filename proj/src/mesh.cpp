#include "instrecon/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <set>
#include <tuple>
#include <utility>

#include <Eigen/Geometry>

#include "instrecon/geometry.hpp"

namespace instrecon {

Aabb TriMesh::bounds() const
{
    Aabb box;
    for (const Vec3& v : vertices) {
        box.expand(v);
    }
    return box;
}

void TriMesh::validate() const
{
    const auto n = vertices.size();
    for (const Face& f : faces) {
        for (std::uint32_t i : f) {
            if (i >= n) {
                throw Error(ErrorCode::InvalidMesh, "mesh-core", "face index " + std::to_string(i) + " out of range");
            }
        }
    }
    if (!vertex_labels.empty() && vertex_labels.size() != n) {
        throw Error(ErrorCode::InvalidMesh, "mesh-core", "vertex label count does not match vertex count");
    }
}

Vec3 TriMesh::face_normal(std::size_t f) const
{
    const Face& face = faces[f];
    return (vertices[face[1]] - vertices[face[0]]).cross(vertices[face[2]] - vertices[face[0]]);
}

double TriMesh::face_area(std::size_t f) const { return 0.5 * face_normal(f).norm(); }

std::size_t drop_degenerate_faces(TriMesh& mesh, double area_eps)
{
    const std::size_t before = mesh.faces.size();
    std::vector<Face> kept;
    kept.reserve(before);
    for (std::size_t f = 0; f < before; ++f) {
        const Face& face = mesh.faces[f];
        const bool repeated = face[0] == face[1] || face[1] == face[2] || face[0] == face[2];
        if (!repeated && mesh.face_area(f) > area_eps) {
            kept.push_back(face);
        }
    }
    mesh.faces = std::move(kept);
    return before - mesh.faces.size();
}

bool is_watertight(const TriMesh& mesh)
{
    std::map<std::pair<std::uint32_t, std::uint32_t>, int> directed;
    for (const Face& f : mesh.faces) {
        for (int k = 0; k < 3; ++k) {
            if (++directed[{f[k], f[(k + 1) % 3]}] > 1) {
                return false;
            }
        }
    }
    for (const auto& [edge, count] : directed) {
        if (directed.find({edge.second, edge.first}) == directed.end()) {
            return false;
        }
    }
    return true;
}

long euler_characteristic(const TriMesh& mesh)
{
    std::set<std::uint32_t> used;
    std::set<std::pair<std::uint32_t, std::uint32_t>> edges;
    for (const Face& f : mesh.faces) {
        for (int k = 0; k < 3; ++k) {
            used.insert(f[k]);
            const auto a = f[k];
            const auto b = f[(k + 1) % 3];
            edges.insert({std::min(a, b), std::max(a, b)});
        }
    }
    return static_cast<long>(used.size()) - static_cast<long>(edges.size()) + static_cast<long>(mesh.faces.size());
}

double surface_area(const TriMesh& mesh)
{
    double area = 0.0;
    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
        area += mesh.face_area(f);
    }
    return area;
}

double signed_volume(const TriMesh& mesh)
{
    double six_volume = 0.0;
    for (const Face& f : mesh.faces) {
        six_volume += mesh.vertices[f[0]].dot(mesh.vertices[f[1]].cross(mesh.vertices[f[2]]));
    }
    return six_volume / 6.0;
}

bool is_orthonormal(const Mat3& rotation, double tol)
{
    return ((rotation.transpose() * rotation - Mat3::Identity()).cwiseAbs().maxCoeff() <= tol);
}

Mat3 axis_angle(const Vec3& rotation_vector)
{
    const double angle = rotation_vector.norm();
    if (angle == 0.0) {
        return Mat3::Identity();
    }
    return Eigen::AngleAxisd(angle, rotation_vector / angle).toRotationMatrix();
}

TriMesh transform(const TriMesh& mesh, const Mat3& rotation, const Vec3& translation, double scale)
{
    if (!is_orthonormal(rotation)) {
        throw Error(ErrorCode::NonOrthonormalRotation, "mesh-core", "rotation is not orthonormal to 1e-6");
    }
    if (!(scale > 0.0)) {
        throw Error(ErrorCode::InvalidConfig, "mesh-core", "scale must be positive");
    }
    TriMesh out = mesh;
    const bool identity = rotation == Mat3::Identity() && translation.isZero() && scale == 1.0;
    if (!identity) {
        for (Vec3& v : out.vertices) {
            v = scale * (rotation * v) + translation;
        }
    }
    return out;
}

TriMesh merge(const TriMesh& a, const TriMesh& b)
{
    TriMesh out = a;
    const auto offset = static_cast<std::uint32_t>(a.vertices.size());
    out.vertices.insert(out.vertices.end(), b.vertices.begin(), b.vertices.end());
    for (const Face& f : b.faces) {
        out.faces.push_back({f[0] + offset, f[1] + offset, f[2] + offset});
    }
    if (a.has_labels() && b.has_labels()) {
        out.vertex_labels.insert(out.vertex_labels.end(), b.vertex_labels.begin(), b.vertex_labels.end());
    } else {
        out.vertex_labels.clear();
    }
    return out;
}

void set_labels(TriMesh& mesh, std::int32_t label) { mesh.vertex_labels.assign(mesh.vertices.size(), label); }

std::int32_t face_label(const TriMesh& mesh, std::size_t f)
{
    const Face& face = mesh.faces[f];
    const std::int32_t a = mesh.vertex_labels[face[0]];
    const std::int32_t b = mesh.vertex_labels[face[1]];
    const std::int32_t c = mesh.vertex_labels[face[2]];
    if (a == b || a == c) {
        return a;
    }
    if (b == c) {
        return b;
    }
    return std::min({a, b, c});
}

namespace {

void orient_outward(TriMesh& mesh)
{
    if (signed_volume(mesh) < 0.0) {
        for (Face& f : mesh.faces) {
            std::swap(f[1], f[2]);
        }
    }
}

// Welds vertices whose coordinates are bitwise identical.
class VertexWelder {
public:
    explicit VertexWelder(TriMesh& mesh) : mesh_(mesh) {}

    std::uint32_t add(const Vec3& p)
    {
        const auto key = std::make_tuple(p.x(), p.y(), p.z());
        const auto it = index_.find(key);
        if (it != index_.end()) {
            return it->second;
        }
        const auto id = static_cast<std::uint32_t>(mesh_.vertices.size());
        mesh_.vertices.push_back(p);
        index_.emplace(key, id);
        return id;
    }

private:
    TriMesh& mesh_;
    std::map<std::tuple<double, double, double>, std::uint32_t> index_;
};

}  // namespace

TriMesh make_icosphere(double radius, int subdivisions, const Vec3& center)
{
    const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<Vec3> verts = {
        {-1, phi, 0}, {1, phi, 0}, {-1, -phi, 0}, {1, -phi, 0}, {0, -1, phi}, {0, 1, phi},
        {0, -1, -phi}, {0, 1, -phi}, {phi, 0, -1}, {phi, 0, 1}, {-phi, 0, -1}, {-phi, 0, 1},
    };
    for (Vec3& v : verts) {
        v.normalize();
    }
    std::vector<Face> faces = {
        {0, 11, 5}, {0, 5, 1}, {0, 1, 7}, {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
        {11, 10, 2}, {10, 7, 6}, {7, 1, 8}, {3, 9, 4}, {3, 4, 2}, {3, 2, 6}, {3, 6, 8},
        {3, 8, 9}, {4, 9, 5}, {2, 4, 11}, {6, 2, 10}, {8, 6, 7}, {9, 8, 1},
    };
    for (int s = 0; s < subdivisions; ++s) {
        std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> midpoints;
        auto midpoint = [&](std::uint32_t a, std::uint32_t b) {
            const auto key = std::make_pair(std::min(a, b), std::max(a, b));
            const auto it = midpoints.find(key);
            if (it != midpoints.end()) {
                return it->second;
            }
            verts.push_back((verts[a] + verts[b]).normalized());
            const auto id = static_cast<std::uint32_t>(verts.size() - 1);
            midpoints.emplace(key, id);
            return id;
        };
        std::vector<Face> next;
        next.reserve(faces.size() * 4);
        for (const Face& f : faces) {
            const auto ab = midpoint(f[0], f[1]);
            const auto bc = midpoint(f[1], f[2]);
            const auto ca = midpoint(f[2], f[0]);
            next.push_back({f[0], ab, ca});
            next.push_back({f[1], bc, ab});
            next.push_back({f[2], ca, bc});
            next.push_back({ab, bc, ca});
        }
        faces = std::move(next);
    }
    TriMesh mesh;
    mesh.vertices.reserve(verts.size());
    for (const Vec3& v : verts) {
        mesh.vertices.push_back(center + radius * v);
    }
    mesh.faces = std::move(faces);
    orient_outward(mesh);
    return mesh;
}

double icosphere_chord_error(double radius, int subdivisions)
{
    const TriMesh mesh = make_icosphere(radius, subdivisions);
    double nearest = radius;
    for (const Face& f : mesh.faces) {
        const Vec3 q = closest_point_on_triangle(Vec3::Zero(), mesh.vertices[f[0]], mesh.vertices[f[1]],
                                                 mesh.vertices[f[2]]);
        nearest = std::min(nearest, q.norm());
    }
    return radius - nearest;
}

TriMesh make_box(const Vec3& lo, const Vec3& hi, int segments)
{
    segments = std::max(segments, 1);
    TriMesh mesh;
    VertexWelder weld(mesh);
    auto coord = [&](int axis, int i) {
        if (i == 0) {
            return lo[axis];
        }
        if (i == segments) {
            return hi[axis];
        }
        return lo[axis] + (hi[axis] - lo[axis]) * (static_cast<double>(i) / segments);
    };
    for (int axis = 0; axis < 3; ++axis) {
        const int u_axis = (axis + 1) % 3;
        const int v_axis = (axis + 2) % 3;
        for (int side = 0; side < 2; ++side) {
            const int fixed = side == 0 ? 0 : segments;
            for (int i = 0; i < segments; ++i) {
                for (int j = 0; j < segments; ++j) {
                    std::array<std::uint32_t, 4> quad{};
                    const int di[4] = {0, 1, 1, 0};
                    const int dj[4] = {0, 0, 1, 1};
                    for (int k = 0; k < 4; ++k) {
                        Vec3 p;
                        p[axis] = coord(axis, fixed);
                        p[u_axis] = coord(u_axis, i + di[k]);
                        p[v_axis] = coord(v_axis, j + dj[k]);
                        quad[k] = weld.add(p);
                    }
                    if (side == 1) {
                        mesh.faces.push_back({quad[0], quad[1], quad[2]});
                        mesh.faces.push_back({quad[0], quad[2], quad[3]});
                    } else {
                        mesh.faces.push_back({quad[0], quad[2], quad[1]});
                        mesh.faces.push_back({quad[0], quad[3], quad[2]});
                    }
                }
            }
        }
    }
    orient_outward(mesh);
    return mesh;
}

TriMesh make_torus(double major_radius, double minor_radius, int major_segments, int minor_segments,
                   const Vec3& center)
{
    TriMesh mesh;
    const double two_pi = 2.0 * std::numbers::pi;
    for (int i = 0; i < major_segments; ++i) {
        const double u = two_pi * i / major_segments;
        for (int j = 0; j < minor_segments; ++j) {
            const double v = two_pi * j / minor_segments;
            const double r = major_radius + minor_radius * std::cos(v);
            mesh.vertices.push_back(center + Vec3(r * std::cos(u), minor_radius * std::sin(v), r * std::sin(u)));
        }
    }
    auto id = [&](int i, int j) {
        return static_cast<std::uint32_t>((i % major_segments) * minor_segments + (j % minor_segments));
    };
    for (int i = 0; i < major_segments; ++i) {
        for (int j = 0; j < minor_segments; ++j) {
            mesh.faces.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
            mesh.faces.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
        }
    }
    orient_outward(mesh);
    return mesh;
}

TriMesh make_cylinder(double radius, double y0, double y1, int around, int rings, const Vec3& axis_origin)
{
    TriMesh mesh;
    const int levels = rings + 2;
    for (int l = 0; l < levels; ++l) {
        const double y = y0 + (y1 - y0) * static_cast<double>(l) / (levels - 1);
        for (int k = 0; k < around; ++k) {
            const double a = 2.0 * std::numbers::pi * k / around;
            mesh.vertices.push_back(axis_origin + Vec3(radius * std::cos(a), y, radius * std::sin(a)));
        }
    }
    const auto bottom = static_cast<std::uint32_t>(mesh.vertices.size());
    mesh.vertices.push_back(axis_origin + Vec3(0, y0, 0));
    const auto top = static_cast<std::uint32_t>(mesh.vertices.size());
    mesh.vertices.push_back(axis_origin + Vec3(0, y1, 0));
    auto id = [&](int l, int k) { return static_cast<std::uint32_t>(l * around + (k % around)); };
    for (int l = 0; l + 1 < levels; ++l) {
        for (int k = 0; k < around; ++k) {
            mesh.faces.push_back({id(l, k), id(l + 1, k), id(l + 1, k + 1)});
            mesh.faces.push_back({id(l, k), id(l + 1, k + 1), id(l, k + 1)});
        }
    }
    for (int k = 0; k < around; ++k) {
        mesh.faces.push_back({bottom, id(0, k), id(0, k + 1)});
        mesh.faces.push_back({top, id(levels - 1, k + 1), id(levels - 1, k)});
    }
    orient_outward(mesh);
    return mesh;
}

}  // namespace instrecon
