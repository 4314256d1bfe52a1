#include "instrecon/bvh.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

#include "instrecon/geometry.hpp"
#include "instrecon/simd/kernels.hpp"

namespace instrecon {
namespace {

constexpr std::uint32_t kTriangleLeafSize = 4;
constexpr std::uint32_t kPointLeafSize = 16;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Relative barycentric tolerance for declaring a ray hit "on an edge".
constexpr double kGrazingTol = 1e-9;

}  // namespace

TriangleBvh::TriangleBvh(const TriMesh& mesh)
{
    mesh.validate();
    triangles_.reserve(mesh.faces.size());
    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
        const Face& face = mesh.faces[f];
        triangles_.push_back(
            {mesh.vertices[face[0]], mesh.vertices[face[1]], mesh.vertices[face[2]], static_cast<std::uint32_t>(f)});
    }
    if (!triangles_.empty()) {
        nodes_.reserve(2 * triangles_.size());
        build(0, static_cast<std::uint32_t>(triangles_.size()));
    }
}

std::uint32_t TriangleBvh::build(std::uint32_t first, std::uint32_t count)
{
    const auto index = static_cast<std::uint32_t>(nodes_.size());
    nodes_.push_back({});
    Aabb box;
    Aabb centroids;
    for (std::uint32_t i = first; i < first + count; ++i) {
        const Triangle& t = triangles_[i];
        box.expand(t.a);
        box.expand(t.b);
        box.expand(t.c);
        centroids.expand((t.a + t.b + t.c) / 3.0);
    }
    nodes_[index].lo = box.min;
    nodes_[index].hi = box.max;
    if (count <= kTriangleLeafSize) {
        nodes_[index].first = first;
        nodes_[index].count = count;
        return index;
    }
    int axis = 0;
    centroids.extent().maxCoeff(&axis);
    const std::uint32_t mid = first + count / 2;
    std::nth_element(triangles_.begin() + first, triangles_.begin() + mid, triangles_.begin() + first + count,
                     [axis](const Triangle& l, const Triangle& r) {
                         const double cl = l.a[axis] + l.b[axis] + l.c[axis];
                         const double cr = r.a[axis] + r.b[axis] + r.c[axis];
                         return cl < cr || (cl == cr && l.face < r.face);
                     });
    build(first, mid - first);
    const std::uint32_t right = build(mid, first + count - mid);
    nodes_[index].first = right;
    nodes_[index].count = 0;
    return index;
}

TriangleBvh::Nearest TriangleBvh::nearest(const Vec3& p) const
{
    Nearest best;
    double best_sq = kInf;
    std::vector<std::uint32_t> stack{0};
    while (!stack.empty()) {
        const Node& node = nodes_[stack.back()];
        const std::uint32_t node_index = stack.back();
        stack.pop_back();
        if (point_box_sq_distance(p, node.lo, node.hi) >= best_sq) {
            continue;
        }
        if (node.count > 0) {
            for (std::uint32_t i = node.first; i < node.first + node.count; ++i) {
                const Triangle& t = triangles_[i];
                const Vec3 q = closest_point_on_triangle(p, t.a, t.b, t.c);
                const double d = (q - p).squaredNorm();
                if (d < best_sq || (d == best_sq && t.face < best.face)) {
                    best_sq = d;
                    best.point = q;
                    best.face = t.face;
                }
            }
            continue;
        }
        const std::uint32_t left = node_index + 1;
        const std::uint32_t right = node.first;
        const double dl = point_box_sq_distance(p, nodes_[left].lo, nodes_[left].hi);
        const double dr = point_box_sq_distance(p, nodes_[right].lo, nodes_[right].hi);
        // Visit the nearer child first.
        if (dl <= dr) {
            stack.push_back(right);
            stack.push_back(left);
        } else {
            stack.push_back(left);
            stack.push_back(right);
        }
    }
    best.distance = std::sqrt(best_sq);
    return best;
}

std::optional<TriangleBvh::RayHit> TriangleBvh::first_hit(const Vec3& origin, const Vec3& dir, double t_max) const
{
    if (triangles_.empty()) {
        return std::nullopt;
    }
    const Vec3 inv_dir = dir.cwiseInverse();
    std::optional<RayHit> best;
    double limit = t_max;
    std::vector<std::uint32_t> stack{0};
    while (!stack.empty()) {
        const std::uint32_t node_index = stack.back();
        stack.pop_back();
        const Node& node = nodes_[node_index];
        if (!intersect_ray_box(origin, inv_dir, node.lo, node.hi, limit)) {
            continue;
        }
        if (node.count > 0) {
            for (std::uint32_t i = node.first; i < node.first + node.count; ++i) {
                const Triangle& t = triangles_[i];
                const auto hit = intersect_ray_triangle(origin, dir, t.a, t.b, t.c);
                if (hit && hit->u >= 0.0 && hit->v >= 0.0 && hit->u + hit->v <= 1.0 && hit->t > 0.0 &&
                    hit->t <= limit) {
                    limit = hit->t;
                    best = RayHit{hit->t, t.face};
                }
            }
            continue;
        }
        stack.push_back(node.first);
        stack.push_back(node_index + 1);
    }
    return best;
}

TriangleBvh::ParityResult TriangleBvh::cast_parity(const Vec3& origin, const Vec3& dir) const
{
    ParityResult result;
    if (triangles_.empty()) {
        return result;
    }
    const Vec3 inv_dir = dir.cwiseInverse();
    std::vector<std::uint32_t> stack{0};
    while (!stack.empty()) {
        const std::uint32_t node_index = stack.back();
        stack.pop_back();
        const Node& node = nodes_[node_index];
        // Grow the box slightly so hits at t ~ 0 are still examined.
        const Vec3 pad = Vec3::Constant(kGeomEps);
        if (!intersect_ray_box(origin - kGeomEps * dir, inv_dir, node.lo - pad, node.hi + pad, kInf)) {
            continue;
        }
        if (node.count == 0) {
            stack.push_back(node.first);
            stack.push_back(node_index + 1);
            continue;
        }
        for (std::uint32_t i = node.first; i < node.first + node.count; ++i) {
            const Triangle& t = triangles_[i];
            const auto hit = intersect_ray_triangle(origin, dir, t.a, t.b, t.c);
            if (!hit) {
                // Ray parallel to the triangle: grazing only if it lies in its plane.
                const Vec3 n = (t.b - t.a).cross(t.c - t.a);
                const double nn = n.norm();
                if (nn > 0.0 && std::abs(n.dot(origin - t.a)) / nn <= kGeomEps) {
                    result.grazing = true;
                }
                continue;
            }
            const double w = 1.0 - hit->u - hit->v;
            if (hit->u < -kGrazingTol || hit->v < -kGrazingTol || w < -kGrazingTol) {
                continue;
            }
            if (std::abs(hit->t) <= kGeomEps) {
                result.touches_origin = true;
                continue;
            }
            if (hit->t < 0.0) {
                continue;
            }
            if (hit->u <= kGrazingTol || hit->v <= kGrazingTol || w <= kGrazingTol) {
                result.grazing = true;
            }
            ++result.crossings;
        }
    }
    return result;
}

MeshQuery::MeshQuery(TriMesh mesh) : mesh_(std::move(mesh)), watertight_(is_watertight(mesh_)), bvh_(mesh_) {}

bool MeshQuery::inside(const Vec3& p) const
{
    if (!watertight_) {
        throw Error(ErrorCode::NonWatertight, "mesh-core", "inside() requires a closed manifold mesh");
    }
    if (bvh_.empty()) {
        return false;
    }
    // Fixed, deliberately irrational-looking directions; the later ones are
    // only used when an earlier ray grazes an edge or vertex.
    static const std::array<Vec3, 3> kDirections = {
        Vec3(0.5377, 0.6813, 0.4967).normalized(),
        Vec3(-0.3719, 0.2411, 0.8965).normalized(),
        Vec3(0.7071, -0.5922, 0.3866).normalized(),
    };
    int odd_votes = 0;
    for (const Vec3& dir : kDirections) {
        const auto r = bvh_.cast_parity(p, dir);
        if (r.touches_origin) {
            return false;
        }
        if (!r.grazing) {
            return (r.crossings % 2) == 1;
        }
        odd_votes += r.crossings % 2;
    }
    return odd_votes >= 2;
}

double MeshQuery::nearest_surface_distance(const Vec3& p) const
{
    if (bvh_.empty()) {
        throw Error(ErrorCode::EmptyMesh, "mesh-core", "nearest surface distance on an empty mesh");
    }
    return bvh_.nearest(p).distance;
}

bool inside(const TriMesh& mesh, const Vec3& p) { return MeshQuery(mesh).inside(p); }

double nearest_surface_distance(const TriMesh& mesh, const Vec3& p)
{
    if (mesh.empty()) {
        throw Error(ErrorCode::EmptyMesh, "mesh-core", "nearest surface distance on an empty mesh");
    }
    return TriangleBvh(mesh).nearest(p).distance;
}

PointTree::PointTree(std::span<const Vec3> points) : points_(points.begin(), points.end())
{
    order_.resize(points_.size());
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    if (!points_.empty()) {
        build(0, static_cast<std::uint32_t>(points_.size()));
    }
    xs_.resize(order_.size());
    ys_.resize(order_.size());
    zs_.resize(order_.size());
    for (std::size_t i = 0; i < order_.size(); ++i) {
        const Vec3& p = points_[order_[i]];
        xs_[i] = p.x();
        ys_[i] = p.y();
        zs_[i] = p.z();
    }
}

std::uint32_t PointTree::build(std::uint32_t first, std::uint32_t count)
{
    const auto index = static_cast<std::uint32_t>(nodes_.size());
    nodes_.push_back({});
    Aabb box;
    for (std::uint32_t i = first; i < first + count; ++i) {
        box.expand(points_[order_[i]]);
    }
    nodes_[index].lo = box.min;
    nodes_[index].hi = box.max;
    if (count <= kPointLeafSize) {
        nodes_[index].first = first;
        nodes_[index].count = count;
        return index;
    }
    int axis = 0;
    box.extent().maxCoeff(&axis);
    const std::uint32_t mid = first + count / 2;
    std::nth_element(order_.begin() + first, order_.begin() + mid, order_.begin() + first + count,
                     [&](std::size_t l, std::size_t r) {
                         return points_[l][axis] < points_[r][axis] ||
                                (points_[l][axis] == points_[r][axis] && l < r);
                     });
    build(first, mid - first);
    const std::uint32_t right = build(mid, first + count - mid);
    nodes_[index].first = right;
    nodes_[index].count = 0;
    return index;
}

PointTree::Nearest PointTree::nearest(const Vec3& q) const
{
    const auto& k = simd::kernels();
    const double qa[3] = {q.x(), q.y(), q.z()};
    double best_sq = kInf;
    std::size_t best = 0;
    std::vector<std::uint32_t> stack{0};
    while (!stack.empty()) {
        const std::uint32_t node_index = stack.back();
        stack.pop_back();
        const Node& node = nodes_[node_index];
        if (point_box_sq_distance(q, node.lo, node.hi) > best_sq) {
            continue;
        }
        if (node.count > 0) {
            double leaf_best = best_sq;
            std::size_t local = 0;
            k.nearest_sq(xs_.data() + node.first, ys_.data() + node.first, zs_.data() + node.first, node.count, qa,
                         &leaf_best, &local);
            if (leaf_best < best_sq) {
                best_sq = leaf_best;
                best = order_[node.first + local];
            }
            continue;
        }
        const std::uint32_t left = node_index + 1;
        const std::uint32_t right = node.first;
        const double dl = point_box_sq_distance(q, nodes_[left].lo, nodes_[left].hi);
        const double dr = point_box_sq_distance(q, nodes_[right].lo, nodes_[right].hi);
        if (dl <= dr) {
            stack.push_back(right);
            stack.push_back(left);
        } else {
            stack.push_back(left);
            stack.push_back(right);
        }
    }
    return {best, best_sq};
}

}  // namespace instrecon
