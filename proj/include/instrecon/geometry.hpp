#pragma once

#include <optional>

#include "instrecon/common.hpp"

namespace instrecon {

/// Closest point on triangle (a, b, c) to p.
Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

struct RayTriangleHit {
    double t;
    double u;  // barycentric weight of b
    double v;  // barycentric weight of c
};

/// Moller-Trumbore intersection for t > -inf (caller filters the range).
/// Returns nullopt for rays parallel to the triangle plane.
std::optional<RayTriangleHit> intersect_ray_triangle(const Vec3& origin, const Vec3& dir, const Vec3& a,
                                                     const Vec3& b, const Vec3& c);

/// Slab test; returns the entry distance or nullopt when the ray misses within [0, t_max].
std::optional<double> intersect_ray_box(const Vec3& origin, const Vec3& inv_dir, const Vec3& lo, const Vec3& hi,
                                        double t_max);

double point_box_sq_distance(const Vec3& p, const Vec3& lo, const Vec3& hi);

}  // namespace instrecon
