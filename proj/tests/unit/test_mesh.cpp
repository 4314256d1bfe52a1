#include <doctest.h>

#include <cmath>
#include <numbers>

#include "instrecon/mesh.hpp"

using namespace instrecon;

TEST_CASE("aabb basics")
{
    Aabb b;
    CHECK_FALSE(b.valid());
    CHECK(b.volume() == 0.0);
    b.expand(Vec3(0, 0, 0));
    b.expand(Vec3(1, 2, 3));
    CHECK(b.valid());
    CHECK(b.volume() == doctest::Approx(6.0));
    CHECK(b.contains(Vec3(0.5, 1, 1)));
    CHECK_FALSE(b.contains(Vec3(1.5, 1, 1)));
    const Aabb p = b.padded(0.1);
    CHECK(p.min.x() == doctest::Approx(-0.1));
    CHECK(p.max.z() == doctest::Approx(3.3));
}

TEST_CASE("primitives are closed and genus matches")
{
    const TriMesh sphere = make_icosphere(1.0, 3);
    CHECK(is_watertight(sphere));
    CHECK(euler_characteristic(sphere) == 2);
    CHECK(std::abs(signed_volume(sphere) - 4.0 / 3.0 * std::numbers::pi) < 0.05);

    const TriMesh box = make_box(Vec3(0, 0, 0), Vec3(1, 2, 3), 3);
    CHECK(is_watertight(box));
    CHECK(euler_characteristic(box) == 2);
    CHECK(signed_volume(box) == doctest::Approx(6.0));
    CHECK(surface_area(box) == doctest::Approx(22.0));

    const TriMesh torus = make_torus(1.0, 0.3, 32, 16);
    CHECK(is_watertight(torus));
    CHECK(euler_characteristic(torus) == 0);

    const TriMesh cyl = make_cylinder(0.2, 0.0, 1.0, 12, 4);
    CHECK(is_watertight(cyl));
    CHECK(euler_characteristic(cyl) == 2);
}

TEST_CASE("icosphere vertices lie on the sphere and chord error bounds faces")
{
    const TriMesh s = make_icosphere(2.0, 2, Vec3(1, 0, 0));
    for (const Vec3& v : s.vertices) CHECK(std::abs((v - Vec3(1, 0, 0)).norm() - 2.0) < 1e-12);
    const double chord = icosphere_chord_error(2.0, 2);
    for (std::size_t f = 0; f < s.faces.size(); ++f) {
        const Vec3 c = (s.vertices[s.faces[f][0]] + s.vertices[s.faces[f][1]] + s.vertices[s.faces[f][2]]) / 3.0;
        CHECK(2.0 - (c - Vec3(1, 0, 0)).norm() <= chord + 1e-12);
    }
}

TEST_CASE("transform: identity is bitwise, scale doubles extents, rotation table")
{
    const TriMesh s = make_icosphere(1.0, 2);
    const TriMesh same = transform(s, Mat3::Identity(), Vec3::Zero(), 1.0);
    CHECK(same.vertices == s.vertices);
    CHECK(same.faces == s.faces);

    const TriMesh big = transform(s, Mat3::Identity(), Vec3::Zero(), 2.0);
    const Vec3 e0 = s.bounds().extent();
    const Vec3 e1 = big.bounds().extent();
    for (int i = 0; i < 3; ++i) CHECK(e1[i] == doctest::Approx(2.0 * e0[i]).epsilon(1e-12));

    TriMesh point;
    point.vertices = {Vec3(1, 0, 0), Vec3(0, 0, 1), Vec3(0, 1, 1)};
    point.faces = {{0, 1, 2}};
    const TriMesh r = transform(point, axis_angle(Vec3(0, 0, std::numbers::pi / 2)), Vec3::Zero(), 1.0);
    CHECK((r.vertices[0] - Vec3(0, 1, 0)).norm() < 1e-12);
}

TEST_CASE("transform rejects non-orthonormal rotations")
{
    Mat3 bad = Mat3::Identity();
    bad(0, 1) = 0.1;
    try {
        transform(make_icosphere(1.0, 1), bad, Vec3::Zero(), 1.0);
        FAIL("expected NonOrthonormalRotation");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NonOrthonormalRotation);
    }
}

TEST_CASE("transform preserves watertightness, Euler characteristic and labels")
{
    TriMesh t = make_torus(1.0, 0.25, 24, 12);
    set_labels(t, kObjectLabel);
    const TriMesh u = transform(t, axis_angle(Vec3(0.3, -0.2, 0.7)), Vec3(1, 2, 3), 1.7);
    CHECK(is_watertight(u));
    CHECK(euler_characteristic(u) == euler_characteristic(t));
    CHECK(u.vertex_labels == t.vertex_labels);
    CHECK(signed_volume(u) == doctest::Approx(signed_volume(t) * 1.7 * 1.7 * 1.7).epsilon(1e-9));
}

TEST_CASE("merge offsets faces and keeps labels")
{
    TriMesh a = make_icosphere(1.0, 1);
    TriMesh b = make_box(Vec3(2, 0, 0), Vec3(3, 1, 1));
    set_labels(a, kHumanLabel);
    set_labels(b, kObjectLabel);
    const TriMesh m = merge(a, b);
    CHECK(m.vertices.size() == a.vertices.size() + b.vertices.size());
    CHECK(m.faces.size() == a.faces.size() + b.faces.size());
    CHECK(face_label(m, 0) == kHumanLabel);
    CHECK(face_label(m, m.faces.size() - 1) == kObjectLabel);
    CHECK(is_watertight(m));
}

TEST_CASE("face label is the majority of vertex labels")
{
    TriMesh m;
    m.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)};
    m.faces = {{0, 1, 2}};
    m.vertex_labels = {1, 0, 1};
    CHECK(face_label(m, 0) == 1);
    m.vertex_labels = {0, 0, 1};
    CHECK(face_label(m, 0) == 0);
}

TEST_CASE("validation and degenerate faces")
{
    TriMesh m;
    m.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(2, 0, 0)};
    m.faces = {{0, 1, 2}, {0, 1, 3}};
    CHECK(drop_degenerate_faces(m) == 1);
    CHECK(m.faces.size() == 1);
    m.faces.push_back({0, 1, 7});
    CHECK_THROWS_AS(m.validate(), Error);
    CHECK_FALSE(is_watertight(make_icosphere(1.0, 0)) == false);
}

TEST_CASE("open mesh is not watertight")
{
    TriMesh s = make_icosphere(1.0, 2);
    s.faces.pop_back();
    CHECK_FALSE(is_watertight(s));
}

TEST_CASE("axis_angle is orthonormal and matches Rodrigues")
{
    const Vec3 w(0.4, -1.1, 0.25);
    const Mat3 R = axis_angle(w);
    CHECK(is_orthonormal(R, 1e-12));
    CHECK((R * w - w).norm() < 1e-12);
    const Eigen::AngleAxisd aa(w.norm(), w.normalized());
    CHECK((R - aa.toRotationMatrix()).norm() < 1e-12);
    CHECK((axis_angle(Vec3::Zero()) - Mat3::Identity()).norm() == 0.0);
}
