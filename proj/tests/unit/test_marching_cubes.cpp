#include <doctest.h>

#include <cmath>
#include <numbers>

#include "instrecon/marching_cubes.hpp"

using namespace instrecon;

namespace {

const Aabb kBox{Vec3::Constant(-1.0), Vec3::Constant(1.0)};

// Occupancy-like: above 0.5 inside a sphere of radius r.
auto ball(double r, const Vec3& c = Vec3::Zero())
{
    return [r, c](const Vec3& p) { return 0.5 + (r - (p - c).norm()); };
}

double sphere_volume(double r) { return 4.0 / 3.0 * std::numbers::pi * r * r * r; }

}  // namespace

TEST_CASE("sphere surface lies within two cells of the radius")
{
    const ScalarGrid g = sample_grid(kBox, 64, ball(0.7));
    const TriMesh m = marching_cubes(g);
    REQUIRE(!m.empty());
    const double cell = g.spacing().x();
    double worst = 0.0;
    for (const Vec3& v : m.vertices) worst = std::max(worst, std::abs(v.norm() - 0.7));
    CHECK(worst < 2.0 * cell);
    CHECK(is_watertight(m));
    CHECK(euler_characteristic(m) == 2);
    CHECK(signed_volume(m) > 0.0);
    CHECK(signed_volume(m) == doctest::Approx(sphere_volume(0.7)).epsilon(0.02));
}

TEST_CASE("constant and all-inside fields give no surface")
{
    CHECK(marching_cubes(sample_grid(kBox, 16, [](const Vec3&) { return 0.2; })).empty());
    CHECK(marching_cubes(sample_grid(kBox, 16, [](const Vec3&) { return 0.9; })).empty());
}

TEST_CASE("volume error shrinks with resolution")
{
    double prev = INFINITY;
    double first = 0.0, last = 0.0;
    for (int res : {32, 64, 128}) {
        const double err = std::abs(signed_volume(marching_cubes(sample_grid(kBox, res, ball(0.6)))) - sphere_volume(0.6));
        CHECK(err < prev);
        if (res == 32) first = err;
        last = err;
        prev = err;
    }
    // Two doublings at first order or better.
    CHECK(first / last >= 4.0);
}

TEST_CASE("orientation points toward lower values")
{
    // Inverted field: the ball is the outside, so the surface faces inward.
    const auto f = ball(0.5);
    const TriMesh m = marching_cubes(sample_grid(kBox, 32, [&](const Vec3& p) { return 1.0 - f(p); }));
    CHECK(signed_volume(m) < 0.0);
    // Each face normal of the upright ball points away from the center.
    const TriMesh up = marching_cubes(sample_grid(kBox, 32, f));
    for (const Face& face : up.faces) {
        const Vec3& a = up.vertices[face[0]];
        const Vec3 n = (up.vertices[face[1]] - a).cross(up.vertices[face[2]] - a);
        CHECK(n.dot(a) > 0.0);
    }
}

TEST_CASE("two disjoint balls and a torus keep their topology")
{
    const auto a = ball(0.3, Vec3(-0.5, 0, 0)), b = ball(0.3, Vec3(0.5, 0, 0));
    const TriMesh two = marching_cubes(sample_grid(kBox, 48, [&](const Vec3& p) { return std::max(a(p), b(p)); }));
    CHECK(is_watertight(two));
    CHECK(euler_characteristic(two) == 4);
    const TriMesh torus = marching_cubes(sample_grid(kBox, 64, [](const Vec3& p) {
        const double q = std::hypot(p.x(), p.z()) - 0.5;
        return 0.5 + 0.2 - std::hypot(q, p.y());
    }));
    CHECK(is_watertight(torus));
    CHECK(euler_characteristic(torus) == 0);
}

TEST_CASE("grid layout and validation")
{
    const ScalarGrid g = sample_grid(kBox, 3, [](const Vec3& p) { return p.x() + 10 * p.y() + 100 * p.z(); });
    CHECK(g.values.size() == 27u);
    CHECK(g.at(2, 0, 0) == doctest::Approx(1 - 10 - 100));
    CHECK(g.position(1, 1, 1).norm() < 1e-15);
    const auto pts = grid_points(kBox, 3);
    for (int z = 0; z < 3; ++z)
        for (int y = 0; y < 3; ++y)
            for (int x = 0; x < 3; ++x) CHECK(pts[static_cast<std::size_t>((z * 3 + y) * 3 + x)] == g.position(x, y, z));
    CHECK_THROWS_AS(sample_grid(kBox, 1, [](const Vec3&) { return 0.0; }), Error);
    ScalarGrid bad = g;
    bad.values[4] = NAN;
    CHECK_THROWS_AS(marching_cubes(bad), Error);
}
