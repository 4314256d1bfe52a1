#include "instrecon/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace instrecon {

// Voronoi-region walk over the triangle's vertices and edges.
Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c)
{
    const Vec3 ab = b - a;
    const Vec3 ac = c - a;
    const Vec3 ap = p - a;
    const double d1 = ab.dot(ap);
    const double d2 = ac.dot(ap);
    if (d1 <= 0.0 && d2 <= 0.0) {
        return a;
    }
    const Vec3 bp = p - b;
    const double d3 = ab.dot(bp);
    const double d4 = ac.dot(bp);
    if (d3 >= 0.0 && d4 <= d3) {
        return b;
    }
    const double vc = d1 * d4 - d3 * d2;
    if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
        return a + (d1 / (d1 - d3)) * ab;
    }
    const Vec3 cp = p - c;
    const double d5 = ab.dot(cp);
    const double d6 = ac.dot(cp);
    if (d6 >= 0.0 && d5 <= d6) {
        return c;
    }
    const double vb = d5 * d2 - d1 * d6;
    if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
        return a + (d2 / (d2 - d6)) * ac;
    }
    const double va = d3 * d6 - d5 * d4;
    if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
        return b + ((d4 - d3) / ((d4 - d3) + (d5 - d6))) * (c - b);
    }
    const double denom = 1.0 / (va + vb + vc);
    return a + ab * (vb * denom) + ac * (vc * denom);
}

std::optional<RayTriangleHit> intersect_ray_triangle(const Vec3& origin, const Vec3& dir, const Vec3& a,
                                                     const Vec3& b, const Vec3& c)
{
    const Vec3 e1 = b - a;
    const Vec3 e2 = c - a;
    const Vec3 pvec = dir.cross(e2);
    const double det = e1.dot(pvec);
    const double scale = e1.norm() * e2.norm() * dir.norm();
    if (std::abs(det) <= 1e-14 * scale) {
        return std::nullopt;
    }
    const double inv_det = 1.0 / det;
    const Vec3 tvec = origin - a;
    const double u = tvec.dot(pvec) * inv_det;
    const Vec3 qvec = tvec.cross(e1);
    const double v = dir.dot(qvec) * inv_det;
    const double t = e2.dot(qvec) * inv_det;
    return RayTriangleHit{t, u, v};
}

std::optional<double> intersect_ray_box(const Vec3& origin, const Vec3& inv_dir, const Vec3& lo, const Vec3& hi,
                                        double t_max)
{
    double t0 = 0.0;
    double t1 = t_max;
    for (int k = 0; k < 3; ++k) {
        double near = (lo[k] - origin[k]) * inv_dir[k];
        double far = (hi[k] - origin[k]) * inv_dir[k];
        if (near > far) {
            std::swap(near, far);
        }
        // NaN from 0 * inf (origin on a slab plane, axis-parallel ray) keeps the slab open.
        if (!std::isnan(near)) {
            t0 = std::max(t0, near);
        }
        if (!std::isnan(far)) {
            t1 = std::min(t1, far);
        }
        if (t0 > t1) {
            return std::nullopt;
        }
    }
    return t0;
}

double point_box_sq_distance(const Vec3& p, const Vec3& lo, const Vec3& hi)
{
    double d = 0.0;
    for (int k = 0; k < 3; ++k) {
        const double e = std::max({lo[k] - p[k], 0.0, p[k] - hi[k]});
        d += e * e;
    }
    return d;
}

}  // namespace instrecon
