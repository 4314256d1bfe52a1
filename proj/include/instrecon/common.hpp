#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace instrecon {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

/// Geometric tolerance (meters) used for on-surface classification everywhere.
inline constexpr double kGeomEps = 1e-6;

/// Instance ids carried by vertex labels, label maps and sample channels.
inline constexpr std::int32_t kHumanLabel = 0;
inline constexpr std::int32_t kObjectLabel = 1;
inline constexpr std::int32_t kUnlabeled = -1;

enum class ErrorCode {
    InvalidMesh,
    NonWatertight,
    EmptyMesh,
    EmptySet,
    NonOrthonormalRotation,
    BehindCamera,
    MissingLabels,
    NonUnitDirection,
    ShapeMismatch,
    MissingInstanceGroundTruth,
    MissingGroundTruth,
    InvalidWeights,
    SingularBlend,
    RigMismatch,
    PlacementFailed,
    InvalidConfig,
    Io,
};

const char* to_string(ErrorCode code) noexcept;

/// Library error. `module()` names the component that raised it so the CLI
/// can attribute data errors.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, std::string module, const std::string& message);

    ErrorCode code() const noexcept { return code_; }
    const std::string& module() const noexcept { return module_; }

private:
    ErrorCode code_;
    std::string module_;
};

}  // namespace instrecon
