#pragma once

#include <vector>

#include <Eigen/Core>

#include "instrecon/mesh.hpp"

namespace instrecon {

/// Per-vertex weights over joints, one row per vertex.
using WeightMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
/// Affine [R | t].
using Affine = Eigen::Matrix<double, 3, 4>;

struct Joint {
    Vec3 position = Vec3::Zero();  // rest position
    int parent = -1;               // -1 for the root
};

struct SkinnedTemplate {
    TriMesh rest_mesh;
    std::vector<Joint> joints;
    WeightMatrix weights;
    std::vector<int> upper;
    std::vector<int> lower;

    int joint_count() const { return static_cast<int>(joints.size()); }

    /// Throws InvalidWeights (bad rows, bad tree, groups not a partition).
    void validate() const;
};

/// Axis-angle rotation per joint plus a root translation.
struct Pose {
    std::vector<Vec3> rotations;
    Vec3 translation = Vec3::Zero();

    static Pose identity(int joints);
    /// Throws InvalidConfig when non-finite or an angle reaches 2 pi.
    void validate(int joints) const;
};

/// Rest-to-posed transform of each joint.
std::vector<Affine> skinning_transforms(const std::vector<Joint>& joints, const Pose& pose);

/// Linear blend skinning of `mesh` with explicit weights. Throws InvalidWeights.
TriMesh lbs_apply(const TriMesh& mesh, const WeightMatrix& weights, const std::vector<Joint>& joints,
                  const Pose& pose);

/// Inverts the per-vertex blended transform. Throws SingularBlend when its
/// determinant falls below 1e-9.
TriMesh lbs_unapply(const TriMesh& posed, const WeightMatrix& weights, const std::vector<Joint>& joints,
                    const Pose& pose);

TriMesh lbs_forward(const SkinnedTemplate& tmpl, const Pose& pose);

/// Un-poses `posed` using the template weights (same vertex count) or weights
/// transferred from the template posed by `pose`.
TriMesh lbs_inverse(const SkinnedTemplate& tmpl, const TriMesh& posed, const Pose& pose);

/// Copies each scan vertex the weight row of the nearest template vertex,
/// with the template posed by `pose` (identity compares against the rest mesh).
WeightMatrix transfer_weights(const SkinnedTemplate& tmpl, const TriMesh& scan, const Pose& pose);
WeightMatrix transfer_weights(const SkinnedTemplate& tmpl, const TriMesh& scan);

/// Upper-group rotations (and the root translation) from `upper_src`, lower-group ones from `lower_src`.
Pose concat_pose(const SkinnedTemplate& tmpl, const Pose& upper_src, const Pose& lower_src);

/// Un-poses the scan from scan_pose, then poses it under
/// concat_pose(scan_pose, target_lower). The result may self-intersect.
TriMesh repose(const SkinnedTemplate& tmpl, const TriMesh& scan, const Pose& scan_pose, const Pose& target_lower);

/// Procedural standing body of disjoint capsule-like parts (torso, head, two
/// arms, two two-bone legs) with nine joints; about 1.7 units tall, feet at y = 0.
/// Upper group: pelvis, spine, neck, shoulders. Lower group: hips and knees.
SkinnedTemplate make_capsule_body(int around = 16, int rings = 8);

/// Index of the body vertex closest to the pelvis joint.
std::size_t hip_vertex_index(const SkinnedTemplate& body);

}  // namespace instrecon
