#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "instrecon/mesh.hpp"

namespace instrecon {

/// Bounding-volume hierarchy over a mesh's triangles. Holds its own copy of the
/// triangle corners; read-only and thread-safe after construction.
class TriangleBvh {
public:
    explicit TriangleBvh(const TriMesh& mesh);

    bool empty() const { return triangles_.empty(); }
    std::size_t triangle_count() const { return triangles_.size(); }

    struct Nearest {
        double distance = 0.0;
        Vec3 point = Vec3::Zero();
        std::uint32_t face = 0;
    };
    /// Exact closest surface point. Requires a non-empty mesh.
    Nearest nearest(const Vec3& p) const;

    struct RayHit {
        double t = 0.0;
        std::uint32_t face = 0;
    };
    std::optional<RayHit> first_hit(const Vec3& origin, const Vec3& dir, double t_max) const;

    struct ParityResult {
        int crossings = 0;
        bool grazing = false;  // hit near an edge/vertex or a tangent triangle
        bool touches_origin = false;  // a hit at |t| <= eps: origin lies on the surface
    };
    ParityResult cast_parity(const Vec3& origin, const Vec3& dir) const;

private:
    struct Node {
        Vec3 lo;
        Vec3 hi;
        std::uint32_t first = 0;  // leaf: first triangle; inner: right child
        std::uint32_t count = 0;  // 0 for inner nodes
    };
    struct Triangle {
        Vec3 a, b, c;
        std::uint32_t face;
    };

    std::uint32_t build(std::uint32_t first, std::uint32_t count);

    std::vector<Triangle> triangles_;
    std::vector<Node> nodes_;
};

/// Mesh with cached spatial index and closed-manifold check: the oracle for
/// inside/outside and surface distance.
class MeshQuery {
public:
    explicit MeshQuery(TriMesh mesh);

    const TriMesh& mesh() const { return mesh_; }
    bool watertight() const { return watertight_; }
    const TriangleBvh& bvh() const { return bvh_; }

    /// Strictly inside the closed surface (points within kGeomEps of a face
    /// along the cast ray count as outside). Throws NonWatertight.
    bool inside(const Vec3& p) const;

    /// Throws EmptyMesh.
    double nearest_surface_distance(const Vec3& p) const;

private:
    TriMesh mesh_;
    bool watertight_;
    TriangleBvh bvh_;
};

bool inside(const TriMesh& mesh, const Vec3& p);
double nearest_surface_distance(const TriMesh& mesh, const Vec3& p);

/// k-d tree over points with SIMD leaf scans; exact nearest neighbour.
class PointTree {
public:
    explicit PointTree(std::span<const Vec3> points);

    std::size_t size() const { return order_.size(); }

    struct Nearest {
        std::size_t index = 0;  // index into the constructor's span
        double sq_distance = 0.0;
    };
    /// Requires a non-empty tree.
    Nearest nearest(const Vec3& q) const;

private:
    struct Node {
        Vec3 lo;
        Vec3 hi;
        std::uint32_t first = 0;
        std::uint32_t count = 0;  // 0 for inner nodes; right child stored in `first`
    };

    std::uint32_t build(std::uint32_t first, std::uint32_t count);

    std::vector<std::size_t> order_;
    std::vector<double> xs_, ys_, zs_;  // leaf-contiguous, in `order_`
    std::vector<Node> nodes_;
    std::vector<Vec3> points_;
};

}  // namespace instrecon
