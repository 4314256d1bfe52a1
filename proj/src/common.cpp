#include "instrecon/common.hpp"

namespace instrecon {

const char* to_string(ErrorCode code) noexcept
{
    switch (code) {
    case ErrorCode::InvalidMesh: return "InvalidMesh";
    case ErrorCode::NonWatertight: return "NonWatertight";
    case ErrorCode::EmptyMesh: return "EmptyMesh";
    case ErrorCode::EmptySet: return "EmptySet";
    case ErrorCode::NonOrthonormalRotation: return "NonOrthonormalRotation";
    case ErrorCode::BehindCamera: return "BehindCamera";
    case ErrorCode::MissingLabels: return "MissingLabels";
    case ErrorCode::NonUnitDirection: return "NonUnitDirection";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::MissingInstanceGroundTruth: return "MissingInstanceGroundTruth";
    case ErrorCode::MissingGroundTruth: return "MissingGroundTruth";
    case ErrorCode::InvalidWeights: return "InvalidWeights";
    case ErrorCode::SingularBlend: return "SingularBlend";
    case ErrorCode::RigMismatch: return "RigMismatch";
    case ErrorCode::PlacementFailed: return "PlacementFailed";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, std::string module, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), module_(std::move(module))
{
}

}  // namespace instrecon
