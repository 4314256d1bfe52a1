#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "instrecon/camera.hpp"
#include "support/toy.hpp"

using namespace instrecon;

namespace {

Camera plain_camera(double f)
{
    Camera c;
    c.K = Mat3::Identity();
    c.K(0, 0) = f;
    c.K(1, 1) = f;
    return c;
}

double line_distance(const Camera& c, const Vec3& target)
{
    const Vec3 fwd = c.R.row(2).transpose();
    const Vec3 d = target - c.center();
    return (d - d.dot(fwd) * fwd).norm();
}

}  // namespace

TEST_CASE("project: optical axis and an off-axis point")
{
    const Camera c = plain_camera(100.0);
    const Projection p0 = project(c, Vec3(0, 0, 1));
    CHECK(p0.pixel.x() == 0.0);
    CHECK(p0.pixel.y() == 0.0);
    CHECK(p0.cam_distance == 1.0);
    const Projection p1 = project(c, Vec3(1, 0, 1));
    CHECK(p1.pixel.x() == doctest::Approx(100.0).epsilon(1e-15));
    CHECK(p1.pixel.y() == 0.0);
    CHECK(p1.cam_distance == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
}

TEST_CASE("project: points behind the camera throw")
{
    const Camera c = plain_camera(100.0);
    for (const Vec3& X : {Vec3(0, 0, 0), Vec3(0, 0, -1), Vec3(1, 1, -0.1)}) {
        try {
            (void)project(c, X);
            FAIL("expected BehindCamera");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::BehindCamera);
        }
    }
}

TEST_CASE("camera distance identity ||R X + t|| = ||X + R^-1 t||")
{
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int i = 0; i < 200; ++i) {
        const Vec3 eye(3 * u(rng), 3 * u(rng), 3 + u(rng));
        const Camera c = look_at(eye, Vec3::Zero(), {64, 64, 40});
        const Vec3 X(0.3 * u(rng), 0.3 * u(rng), 0.3 * u(rng));
        const Projection p = project(c, X);
        CHECK(std::abs(p.cam_distance - c.to_camera(X).norm()) < 1e-12);
        CHECK(std::abs(p.cam_distance - (X - eye).norm()) < 1e-12);
    }
}

TEST_CASE("rig_circle: six views at 60 degree spacing looking at the target")
{
    const Vec3 target(0.1, 0.5, -0.2);
    const auto cams = rig_circle(6, 2.0, 0.3, target, {64, 64, 40});
    REQUIRE(cams.size() == 6);
    for (std::size_t i = 0; i < cams.size(); ++i) {
        const Vec3 a = cams[i].center() - target;
        const Vec3 b = cams[(i + 1) % 6].center() - target;
        const double az_a = std::atan2(a.z(), a.x());
        const double az_b = std::atan2(b.z(), b.x());
        double gap = az_b - az_a;
        if (gap < 0) gap += 2 * std::numbers::pi;
        CHECK(std::abs(gap - std::numbers::pi / 3) < 1e-9);
        CHECK(line_distance(cams[i], target) < 1e-9);
        CHECK(std::abs(a.y() - 0.3) < 1e-12);
        cams[i].validate();
    }
}

TEST_CASE("rig_circle: a single view sits on +x")
{
    const auto cams = rig_circle(1, 2.0, 0.0, Vec3::Zero(), {64, 64, 40});
    REQUIRE(cams.size() == 1);
    CHECK((cams[0].center() - Vec3(2, 0, 0)).norm() < 1e-12);
    CHECK(line_distance(cams[0], Vec3::Zero()) < 1e-9);
    const Projection p = project(cams[0], Vec3::Zero());
    // Pixel centers sit at integers, so the middle of a 64-wide image is 31.5.
    CHECK(p.pixel.x() == doctest::Approx(31.5));
    CHECK(p.pixel.y() == doctest::Approx(31.5));
}

TEST_CASE("rig_sphere: 64 views on the sphere, spacing and determinism")
{
    const Vec3 target(1, 2, 3);
    const auto cams = rig_sphere(64, 1.5, target, {64, 64, 40});
    REQUIRE(cams.size() == 64);
    for (const Camera& c : cams) {
        CHECK(std::abs((c.center() - target).norm() - 1.5) < 1e-9);
        CHECK(line_distance(c, target) < 1e-9);
    }
    const auto again = rig_sphere(64, 1.5, target, {64, 64, 40});
    for (std::size_t i = 0; i < cams.size(); ++i) CHECK(cams[i].R == again[i].R);

    for (int n : {4, 16, 64}) {
        const auto rig = rig_sphere(n, 1.0, Vec3::Zero(), {64, 64, 40});
        double min_angle = INFINITY;
        for (std::size_t i = 0; i < rig.size(); ++i)
            for (std::size_t j = i + 1; j < rig.size(); ++j) {
                const double c = rig[i].center().normalized().dot(rig[j].center().normalized());
                min_angle = std::min(min_angle, std::acos(std::clamp(c, -1.0, 1.0)));
            }
        // Ideal spacing: cap area 4 pi / n per view.
        const double ideal = std::sqrt(4.0 * std::numbers::pi / n);
        CHECK(min_angle >= 0.5 * ideal);
        if (n == 4) CHECK(min_angle * 180.0 / std::numbers::pi >= 50.0);
    }
    CHECK_THROWS_AS(rig_sphere(3, 1.0, Vec3::Zero(), {64, 64, 40}), Error);
}

TEST_CASE("rig file round trip")
{
    const auto dir = toy::scratch("camera_rig");
    const auto cams = rig_sphere(8, 2.0, Vec3(0, 1, 0), {80, 60, 35});
    write_rig(dir / "rig.json", cams);
    const auto back = read_rig(dir / "rig.json");
    REQUIRE(back.size() == cams.size());
    for (std::size_t i = 0; i < cams.size(); ++i) {
        CHECK(back[i].K == cams[i].K);
        CHECK(back[i].R == cams[i].R);
        CHECK(back[i].t == cams[i].t);
        CHECK(back[i].width == 80);
        CHECK(back[i].height == 60);
    }
}

TEST_CASE("camera validation")
{
    Camera c = plain_camera(10);
    c.validate();
    c.R(0, 1) = 0.2;
    CHECK_THROWS_AS(c.validate(), Error);
    Camera d = plain_camera(-10);
    CHECK_THROWS_AS(d.validate(), Error);
}
