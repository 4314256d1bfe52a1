#include <doctest.h>

#include <cmath>
#include <random>
#include <thread>

#include "instrecon/bvh.hpp"
#include "instrecon/geometry.hpp"

using namespace instrecon;

namespace {

Vec3 random_point(std::mt19937_64& rng, double lo, double hi)
{
    std::uniform_real_distribution<double> u(lo, hi);
    return {u(rng), u(rng), u(rng)};
}

double brute_distance(const TriMesh& m, const Vec3& p)
{
    double best = INFINITY;
    for (const Face& f : m.faces) {
        const Vec3 q = closest_point_on_triangle(p, m.vertices[f[0]], m.vertices[f[1]], m.vertices[f[2]]);
        best = std::min(best, (q - p).norm());
    }
    return best;
}

}  // namespace

TEST_CASE("inside: sphere examples")
{
    const TriMesh s = make_icosphere(1.0, 3);
    CHECK(inside(s, Vec3(0, 0, 0)));
    CHECK_FALSE(inside(s, Vec3(2, 0, 0)));
}

TEST_CASE("inside agrees with analytic containment on box, sphere and torus")
{
    std::mt19937_64 rng(7);
    const double band = 1e-6;

    const MeshQuery cube(make_box(Vec3(0, 0, 0), Vec3(1, 1, 1), 2));
    CHECK(cube.inside(Vec3(0.25, 0.75, 0.5)));
    int cube_bad = 0;
    for (int i = 0; i < 100000; ++i) {
        const Vec3 p = random_point(rng, -0.5, 1.5);
        const double d = std::max((p - Vec3::Constant(0.5)).cwiseAbs().maxCoeff() - 0.5, -1.0);
        if (std::abs(d) < band) continue;
        cube_bad += cube.inside(p) != (d < 0);
    }
    CHECK(cube_bad == 0);

    // Tessellated primitives: compare away from the chord band.
    const TriMesh sphere_mesh = make_icosphere(1.0, 3);
    const double chord = icosphere_chord_error(1.0, 3);
    const MeshQuery sphere(sphere_mesh);
    int sphere_bad = 0;
    for (int i = 0; i < 100000; ++i) {
        const Vec3 p = random_point(rng, -1.5, 1.5);
        const double r = p.norm();
        if (r > 1.0 - chord - band && r < 1.0 + band) continue;
        sphere_bad += sphere.inside(p) != (r < 1.0);
    }
    CHECK(sphere_bad == 0);

    const TriMesh torus_mesh = make_torus(1.0, 0.3, 64, 32);
    const MeshQuery torus(torus_mesh);
    int torus_bad = 0;
    int checked = 0;
    for (int i = 0; i < 100000; ++i) {
        const Vec3 p = random_point(rng, -1.5, 1.5);
        const double q = std::hypot(std::hypot(p.x(), p.z()) - 1.0, p.y());
        const double mesh_d = torus.nearest_surface_distance(p);
        if (mesh_d < band || std::abs(q - 0.3) < 0.01) continue;
        ++checked;
        torus_bad += torus.inside(p) != (q < 0.3);
    }
    CHECK(checked > 90000);
    CHECK(torus_bad == 0);
}

TEST_CASE("inside on an open mesh throws NonWatertight")
{
    TriMesh s = make_icosphere(1.0, 2);
    s.faces.pop_back();
    const MeshQuery q(s);
    CHECK_FALSE(q.watertight());
    try {
        (void)q.inside(Vec3::Zero());
        FAIL("expected NonWatertight");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NonWatertight);
    }
}

TEST_CASE("inside handles rays through vertices and edges")
{
    // Axis-aligned queries hit the box grid lines exactly.
    const MeshQuery cube(make_box(Vec3(-1, -1, -1), Vec3(1, 1, 1), 4));
    CHECK(cube.inside(Vec3(0, 0, 0)));
    CHECK(cube.inside(Vec3(0.5, 0.5, 0)));
    CHECK_FALSE(cube.inside(Vec3(1.5, 0, 0)));
    CHECK_FALSE(cube.inside(Vec3(1.0, 0.0, 0.0)));  // on the surface
}

TEST_CASE("nearest_surface_distance examples")
{
    const TriMesh s = make_icosphere(1.0, 3);
    const double chord = icosphere_chord_error(1.0, 3);
    const double d0 = nearest_surface_distance(s, Vec3::Zero());
    CHECK(d0 <= 1.0);
    CHECK(d0 >= 1.0 - chord - 1e-12);
    CHECK(nearest_surface_distance(s, s.vertices[5]) == 0.0);

    const TriMesh cube = make_box(Vec3(0, 0, 0), Vec3(1, 1, 1));
    CHECK(nearest_surface_distance(cube, Vec3(2, 0.5, 0.5)) == 1.0);
    CHECK_THROWS_AS(nearest_surface_distance(TriMesh{}, Vec3::Zero()), Error);
}

TEST_CASE("nearest_surface_distance matches brute force and is zero on faces")
{
    const TriMesh t = make_torus(1.0, 0.3, 24, 12);
    const MeshQuery q(t);
    std::mt19937_64 rng(3);
    for (int i = 0; i < 300; ++i) {
        const Vec3 p = random_point(rng, -2, 2);
        CHECK(q.nearest_surface_distance(p) == doctest::Approx(brute_distance(t, p)).epsilon(1e-12));
    }
    std::uniform_real_distribution<double> u(0, 1);
    for (int i = 0; i < 100; ++i) {
        const Face& f = t.faces[static_cast<std::size_t>(i) * 7 % t.faces.size()];
        double a = u(rng), b = u(rng);
        if (a + b > 1) {
            a = 1 - a;
            b = 1 - b;
        }
        const Vec3 p = t.vertices[f[0]] + a * (t.vertices[f[1]] - t.vertices[f[0]]) + b * (t.vertices[f[2]] - t.vertices[f[0]]);
        CHECK(q.nearest_surface_distance(p) < 1e-9);
    }
}

TEST_CASE("queries are safe from many threads")
{
    const MeshQuery q(make_icosphere(1.0, 3));
    std::vector<int> counts(4, 0);
    std::vector<std::thread> pool;
    for (int t = 0; t < 4; ++t)
        pool.emplace_back([&, t] {
            std::mt19937_64 rng(static_cast<std::uint64_t>(t));
            for (int i = 0; i < 2000; ++i) counts[static_cast<std::size_t>(t)] += q.inside(random_point(rng, -1.2, 1.2));
        });
    for (auto& th : pool) th.join();
    for (int t = 0; t < 4; ++t) {
        std::mt19937_64 rng(static_cast<std::uint64_t>(t));
        int serial = 0;
        for (int i = 0; i < 2000; ++i) serial += q.inside(random_point(rng, -1.2, 1.2));
        CHECK(serial == counts[static_cast<std::size_t>(t)]);
    }
}

TEST_CASE("point tree nearest matches brute force")
{
    std::mt19937_64 rng(11);
    std::vector<Vec3> pts;
    for (int i = 0; i < 700; ++i) pts.push_back(random_point(rng, -1, 1));
    pts.push_back(pts[3]);  // duplicate: lowest index wins
    const PointTree tree(pts);
    for (int i = 0; i < 500; ++i) {
        const Vec3 q = random_point(rng, -1.2, 1.2);
        std::size_t best = 0;
        double best_sq = INFINITY;
        for (std::size_t j = 0; j < pts.size(); ++j) {
            const double d = (pts[j] - q).squaredNorm();
            if (d < best_sq) {
                best_sq = d;
                best = j;
            }
        }
        const auto n = tree.nearest(q);
        CHECK(n.sq_distance == best_sq);
        CHECK(n.index == best);
    }
    CHECK(tree.nearest(pts[3]).index == 3);
}

TEST_CASE("ray-triangle and closest point primitives")
{
    const Vec3 a(0, 0, 0), b(1, 0, 0), c(0, 1, 0);
    const auto hit = intersect_ray_triangle(Vec3(0.2, 0.3, 1), Vec3(0, 0, -1), a, b, c);
    REQUIRE(hit);
    CHECK(hit->t == doctest::Approx(1.0));
    CHECK(hit->u == doctest::Approx(0.2));
    CHECK(hit->v == doctest::Approx(0.3));
    // Misses come back with barycentrics outside the triangle; parallel rays give nothing.
    const auto miss = intersect_ray_triangle(Vec3(2, 2, 1), Vec3(0, 0, -1), a, b, c);
    REQUIRE(miss);
    CHECK(miss->u + miss->v > 1.0);
    CHECK_FALSE(intersect_ray_triangle(Vec3(0.2, 0.2, 1), Vec3(1, 0, 0), a, b, c));
    CHECK((closest_point_on_triangle(Vec3(-1, -1, 0), a, b, c) - a).norm() == 0.0);
    CHECK((closest_point_on_triangle(Vec3(0.25, 0.25, 3), a, b, c) - Vec3(0.25, 0.25, 0)).norm() < 1e-15);
    CHECK(point_box_sq_distance(Vec3(2, 0.5, 0.5), Vec3(0, 0, 0), Vec3(1, 1, 1)) == 1.0);
}
