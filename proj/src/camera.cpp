#include "instrecon/camera.hpp"

#include <cmath>
#include <numbers>

#include "instrecon/mesh.hpp"
#include "instrecon/raw_io.hpp"

namespace instrecon {

void Camera::validate() const
{
    const bool k_ok = K(1, 0) == 0.0 && K(2, 0) == 0.0 && K(2, 1) == 0.0 && K(0, 0) > 0.0 && K(1, 1) > 0.0 &&
                      K(2, 2) == 1.0;
    if (!k_ok) {
        throw Error(ErrorCode::InvalidConfig, "camera-mv", "K must be upper-triangular with positive focal lengths");
    }
    if (!is_orthonormal(R)) {
        throw Error(ErrorCode::NonOrthonormalRotation, "camera-mv", "camera rotation is not orthonormal");
    }
    if (width <= 0 || height <= 0) {
        throw Error(ErrorCode::InvalidConfig, "camera-mv", "image size must be positive");
    }
}

Mat3 IntrinsicsSpec::matrix() const
{
    const double f = 0.5 * height / std::tan(0.5 * fov_y_deg * std::numbers::pi / 180.0);
    Mat3 K = Mat3::Identity();
    K(0, 0) = f;
    K(1, 1) = f;
    K(0, 2) = 0.5 * (width - 1);
    K(1, 2) = 0.5 * (height - 1);
    return K;
}

Projection project(const Camera& cam, const Vec3& X)
{
    const Vec3 xc = cam.R * X + cam.t;
    if (!(xc.z() > 0.0)) {
        throw Error(ErrorCode::BehindCamera, "camera-mv", "point is not in front of the camera");
    }
    const Vec3 h = cam.K * xc;
    const Vec3 ray = X + cam.R.transpose() * cam.t;
    return {Vec2(h.x() / h.z(), h.y() / h.z()), ray.norm(), xc.z()};
}

Camera look_at(const Vec3& eye, const Vec3& target, const IntrinsicsSpec& intrinsics)
{
    const Vec3 forward = (target - eye).normalized();
    Vec3 up = Vec3::UnitY();
    if (std::abs(forward.dot(up)) > 1.0 - 1e-9) {
        up = Vec3::UnitZ();
    }
    const Vec3 right = forward.cross(up).normalized();
    const Vec3 down = forward.cross(right);
    Camera cam;
    cam.R.row(0) = right.transpose();
    cam.R.row(1) = down.transpose();
    cam.R.row(2) = forward.transpose();
    cam.t = -(cam.R * eye);
    cam.K = intrinsics.matrix();
    cam.width = intrinsics.width;
    cam.height = intrinsics.height;
    return cam;
}

std::vector<Camera> rig_circle(int n_views, double radius, double height, const Vec3& lookat,
                               const IntrinsicsSpec& intrinsics)
{
    if (n_views < 1) {
        throw Error(ErrorCode::InvalidConfig, "camera-mv", "rig_circle needs at least one view");
    }
    std::vector<Camera> cams;
    cams.reserve(static_cast<std::size_t>(n_views));
    for (int k = 0; k < n_views; ++k) {
        const double a = 2.0 * std::numbers::pi * k / n_views;
        const Vec3 eye = lookat + Vec3(radius * std::cos(a), height, radius * std::sin(a));
        cams.push_back(look_at(eye, lookat, intrinsics));
    }
    return cams;
}

std::vector<Camera> rig_sphere(int n_views, double radius, const Vec3& lookat, const IntrinsicsSpec& intrinsics)
{
    if (n_views < 4) {
        throw Error(ErrorCode::InvalidConfig, "camera-mv", "rig_sphere needs at least four views");
    }
    const double golden_angle = std::numbers::pi * (3.0 - std::sqrt(5.0));
    std::vector<Camera> cams;
    cams.reserve(static_cast<std::size_t>(n_views));
    for (int i = 0; i < n_views; ++i) {
        const double y = 1.0 - 2.0 * (i + 0.5) / n_views;
        const double r = std::sqrt(std::max(0.0, 1.0 - y * y));
        const double phi = golden_angle * i;
        const Vec3 dir(r * std::cos(phi), y, r * std::sin(phi));
        cams.push_back(look_at(lookat + radius * dir, lookat, intrinsics));
    }
    return cams;
}

namespace {

nlohmann::json mat_to_json(const Mat3& m)
{
    nlohmann::json rows = nlohmann::json::array();
    for (int r = 0; r < 3; ++r) {
        rows.push_back({m(r, 0), m(r, 1), m(r, 2)});
    }
    return rows;
}

Mat3 mat_from_json(const nlohmann::json& j)
{
    Mat3 m;
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) {
            m(r, c) = j.at(r).at(c).get<double>();
        }
    }
    return m;
}

}  // namespace

void write_rig(const std::filesystem::path& path, const std::vector<Camera>& cams)
{
    nlohmann::json j{{"format", "instrecon-rig"}, {"version", 1}};
    nlohmann::json list = nlohmann::json::array();
    for (const Camera& c : cams) {
        list.push_back({{"K", mat_to_json(c.K)}, {"R", mat_to_json(c.R)}, {"t", {c.t.x(), c.t.y(), c.t.z()}},
                        {"width", c.width}, {"height", c.height}});
    }
    j["cameras"] = list;
    raw::write_json(path, j);
}

std::vector<Camera> read_rig(const std::filesystem::path& path)
{
    const auto j = raw::read_json(path);
    std::vector<Camera> cams;
    try {
        for (const auto& c : j.at("cameras")) {
            Camera cam;
            cam.K = mat_from_json(c.at("K"));
            cam.R = mat_from_json(c.at("R"));
            const auto& t = c.at("t");
            cam.t = Vec3(t.at(0).get<double>(), t.at(1).get<double>(), t.at(2).get<double>());
            cam.width = c.at("width").get<int>();
            cam.height = c.at("height").get<int>();
            cam.validate();
            cams.push_back(cam);
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::Io, "camera-mv", path.string() + ": " + e.what());
    }
    return cams;
}

}  // namespace instrecon
