#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "instrecon/common.hpp"

namespace instrecon {

struct Aabb {
    Vec3 min = Vec3::Constant(std::numeric_limits<double>::infinity());
    Vec3 max = Vec3::Constant(-std::numeric_limits<double>::infinity());

    bool valid() const { return (min.array() <= max.array()).all(); }
    void expand(const Vec3& p)
    {
        min = min.cwiseMin(p);
        max = max.cwiseMax(p);
    }
    void expand(const Aabb& other)
    {
        min = min.cwiseMin(other.min);
        max = max.cwiseMax(other.max);
    }
    Vec3 extent() const { return max - min; }
    Vec3 center() const { return 0.5 * (min + max); }
    double diagonal() const { return valid() ? extent().norm() : 0.0; }
    double volume() const { return valid() ? extent().prod() : 0.0; }
    bool contains(const Vec3& p) const { return (p.array() >= min.array()).all() && (p.array() <= max.array()).all(); }

    /// Grown on every side by `fraction` of the extent along that axis.
    Aabb padded(double fraction) const
    {
        const Vec3 pad = fraction * extent();
        return Aabb{min - pad, max + pad};
    }
};

using Face = std::array<std::uint32_t, 3>;

/// Indexed triangle mesh. `vertex_labels` is either empty or one instance id
/// per vertex (kHumanLabel, kObjectLabel or kUnlabeled).
struct TriMesh {
    std::vector<Vec3> vertices;
    std::vector<Face> faces;
    std::vector<std::int32_t> vertex_labels;

    bool empty() const { return faces.empty(); }
    bool has_labels() const { return !vertex_labels.empty(); }
    Aabb bounds() const;

    /// Throws InvalidMesh on out-of-range indices or a label array of the wrong size.
    void validate() const;

    Vec3 face_normal(std::size_t f) const;  // unnormalized, length = 2 * area
    double face_area(std::size_t f) const;
};

/// Removes zero-area faces (area <= eps); returns how many were dropped.
std::size_t drop_degenerate_faces(TriMesh& mesh, double area_eps = 1e-14);

/// Every edge shared by exactly two faces traversing it in opposite directions.
bool is_watertight(const TriMesh& mesh);

/// V - E + F counting only vertices referenced by faces.
long euler_characteristic(const TriMesh& mesh);

double surface_area(const TriMesh& mesh);

/// Signed volume by the divergence theorem; positive for outward winding.
double signed_volume(const TriMesh& mesh);

/// v' = scale * R * v + t. R must be orthonormal to 1e-6.
TriMesh transform(const TriMesh& mesh, const Mat3& rotation, const Vec3& translation, double scale);

/// Concatenates b after a. Labels survive only if both meshes carry them.
TriMesh merge(const TriMesh& a, const TriMesh& b);

/// Assigns `label` to every vertex.
void set_labels(TriMesh& mesh, std::int32_t label);

/// Majority of the three vertex labels; ties resolve to the lowest label.
std::int32_t face_label(const TriMesh& mesh, std::size_t f);

bool is_orthonormal(const Mat3& rotation, double tol = 1e-6);

/// Rotation matrix from an axis-angle vector (radians).
Mat3 axis_angle(const Vec3& rotation_vector);

// Procedural closed primitives with outward winding.
TriMesh make_icosphere(double radius, int subdivisions, const Vec3& center = Vec3::Zero());
TriMesh make_box(const Vec3& lo, const Vec3& hi, int segments = 1);
TriMesh make_torus(double major_radius, double minor_radius, int major_segments, int minor_segments,
                   const Vec3& center = Vec3::Zero());

/// Closed cylinder along +y from y0 to y1, with `rings` intermediate vertex rings.
TriMesh make_cylinder(double radius, double y0, double y1, int around, int rings, const Vec3& axis_origin = Vec3::Zero());

/// Largest distance between a unit-radius icosphere facet and the true sphere.
double icosphere_chord_error(double radius, int subdivisions);

}  // namespace instrecon
