#pragma once

#include <filesystem>
#include <vector>

#include "instrecon/common.hpp"

namespace instrecon {

/// Pinhole camera: world-to-camera rotation R and translation t, intrinsics K
/// in pixels. Camera space is x right, y down, z forward; pixel centers sit at
/// integer coordinates.
struct Camera {
    Mat3 K = Mat3::Identity();
    Mat3 R = Mat3::Identity();
    Vec3 t = Vec3::Zero();
    int width = 512;
    int height = 512;

    /// Camera center in world coordinates, -R^T t.
    Vec3 center() const { return -(R.transpose() * t); }
    Vec3 to_camera(const Vec3& X) const { return R * X + t; }
    /// Throws InvalidConfig when K or R violate the camera invariants.
    void validate() const;
};

/// Square-pixel intrinsics with the principal point at the image center.
struct IntrinsicsSpec {
    int width = 512;
    int height = 512;
    double fov_y_deg = 40.0;

    Mat3 matrix() const;
};

struct Projection {
    Vec2 pixel;           // perspective-divided K (R X + t)
    double cam_distance;  // || X + R^-1 t ||
    double depth_z;       // camera-space z
};

/// Throws BehindCamera when the camera-space z <= 0.
Projection project(const Camera& cam, const Vec3& X);

/// Camera at `eye` looking at `target` with world +y up.
Camera look_at(const Vec3& eye, const Vec3& target, const IntrinsicsSpec& intrinsics);

/// n cameras at equal azimuth steps of 2 pi / n on a circle of `radius` around
/// `lookat`, raised by `height` along +y; the first sits on +x.
std::vector<Camera> rig_circle(int n_views, double radius, double height, const Vec3& lookat,
                               const IntrinsicsSpec& intrinsics);

/// n cameras on a Fibonacci lattice over the sphere of `radius` around `lookat`.
std::vector<Camera> rig_sphere(int n_views, double radius, const Vec3& lookat, const IntrinsicsSpec& intrinsics);

void write_rig(const std::filesystem::path& path, const std::vector<Camera>& cams);
std::vector<Camera> read_rig(const std::filesystem::path& path);

}  // namespace instrecon
